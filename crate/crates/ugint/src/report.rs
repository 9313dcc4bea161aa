//! On-disk matrix format and the structured per-invocation report
//! emitted by the command-line tool. Field order is fixed by the struct
//! definitions so an emitted record re-serializes byte-identically.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, UgError};
use crate::linalg::ComplexMatrix;

/// JSON matrix container: `data[i][j]` is the `[re, im]` pair of entry
/// (i, j).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<[f64; 2]>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        MatrixFile {
            rows: m.rows(),
            cols: m.cols(),
            data: (0..m.rows())
                .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.data.len() != self.rows
            || self.data.iter().any(|row| row.len() != self.cols)
        {
            return Err(UgError::input("matrix file data does not match rows/cols"));
        }
        ComplexMatrix::new(
            self.rows,
            self.cols,
            self.data
                .iter()
                .flatten()
                .map(|&[re, im]| Complex64::new(re, im))
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<ComplexMatrix> {
        let bytes = std::fs::read(path)
            .map_err(|e| UgError::input(format!("cannot read {}: {}", path.display(), e)))?;
        let file: MatrixFile = serde_json::from_slice(&bytes)
            .map_err(|e| UgError::input(format!("malformed matrix file {}: {}", path.display(), e)))?;
        file.to_matrix()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("matrix serialization");
        text.push('\n');
        std::fs::write(path, text)
            .map_err(|e| UgError::input(format!("cannot write {}: {}", path.display(), e)))
    }
}

/// Canonical content digest of a matrix, independent of on-disk
/// formatting: sha256 over the compact JSON serialization.
pub fn matrix_digest(m: &ComplexMatrix) -> String {
    let canonical = serde_json::to_string(&MatrixFile::from_matrix(m)).expect("serialization");
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    let out = hasher.finalize();
    out.iter().map(|b| format!("{:02x}", b)).collect()
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Per-invocation diagnostics; absent fields are omitted from the
/// serialized record.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectra: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confluent: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_truncation: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conjecture: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_weight: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub last_shell_magnitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series_value: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series_rel_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_mean: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_z_scores: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl Diagnostics {
    pub fn from_integral(r: &crate::integrals::IntegralResult) -> Self {
        Diagnostics {
            spectra: Some(
                r.spectra_used
                    .iter()
                    .map(|s| s.values.iter().copied().map(pair).collect())
                    .collect(),
            ),
            confluent: Some(r.confluent_path),
            min_gap: r.min_gap_seen.is_finite().then_some(r.min_gap_seen),
            kernel_truncation: Some(r.kernel_truncation),
            conjecture: r.conjecture.then_some(true),
            ..Diagnostics::default()
        }
    }
}

/// One structured record per invocation, written to standard output.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReportRecord {
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub value: [f64; 2],
    pub diagnostics: Diagnostics,
    pub status: String,
}

impl ReportRecord {
    pub fn new(command: String, value: Complex64) -> Self {
        ReportRecord {
            command,
            inputs: BTreeMap::new(),
            value: pair(value),
            diagnostics: Diagnostics::default(),
            status: "ok".to_owned(),
        }
    }

    pub fn record_input(&mut self, name: &str, m: &ComplexMatrix) {
        self.inputs.insert(name.to_owned(), matrix_digest(m));
    }

    /// Serialized form, one JSON document plus trailing newline.
    pub fn render(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("record serialization");
        text.push('\n');
        text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_file_round_trip() {
        let m = ComplexMatrix::from_fn(2, 3, |i, j| {
            Complex64::new(i as f64 + 0.125, j as f64 - 0.25)
        });
        let file = MatrixFile::from_matrix(&m);
        let back = file.to_matrix().unwrap();
        assert_eq!(m.entries(), back.entries());
    }

    #[test]
    fn matrix_file_shape_mismatch_rejected() {
        let bad = MatrixFile {
            rows: 2,
            cols: 2,
            data: vec![vec![[1.0, 0.0], [0.0, 0.0]]],
        };
        assert!(bad.to_matrix().is_err());
    }

    #[test]
    fn digest_is_content_addressed() {
        let m1 = ComplexMatrix::identity(2);
        let m2 = ComplexMatrix::identity(2);
        let m3 = ComplexMatrix::zeros(2, 2);
        assert_eq!(matrix_digest(&m1), matrix_digest(&m2));
        assert_ne!(matrix_digest(&m1), matrix_digest(&m3));
        assert_eq!(matrix_digest(&m1).len(), 64);
    }

    #[test]
    fn record_round_trips_byte_identically() {
        let mut rec = ReportRecord::new("eval i1 --nu 1".into(), Complex64::new(1.5, -0.5));
        rec.record_input("a", &ComplexMatrix::identity(2));
        rec.diagnostics.confluent = Some(false);
        rec.diagnostics.notes.push("example".into());
        let text = rec.render();
        let parsed: ReportRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed.render(), text);
        assert_eq!(parsed, rec);
    }
}
