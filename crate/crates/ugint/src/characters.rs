//! Representation-theoretic kernel: partitions labeling Gl(N) irreps,
//! exact character-expansion coefficients, dimensions, and numerically
//! stable Weyl characters (Schur polynomial values).
//!
//! All coefficient arithmetic is exact big-integer / big-rational; the
//! conversion to floating point happens once, at the oracle summation
//! boundary.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Result, UgError};
use crate::integrals::confluent_det_ratio;
use crate::linalg::Spectrum;
use crate::special::{factorial_exact, SeriesKernel};

/// Irreducible-representation label: non-increasing non-negative parts,
/// trailing zeros included up to the ambient rank N.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.is_empty() {
            return Err(UgError::input("partition needs at least one slot"));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(UgError::input("partition parts must be non-increasing"));
        }
        Ok(Partition { parts })
    }

    pub fn trivial(ambient_rank: usize) -> Self {
        Partition {
            parts: vec![0; ambient_rank],
        }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn ambient_rank(&self) -> usize {
        self.parts.len()
    }

    pub fn weight(&self) -> u64 {
        self.parts.iter().map(|&p| p as u64).sum()
    }

    /// Shifted indices k_i = N + n_i - i (1-based i); strictly decreasing
    /// and nonnegative.
    pub fn shifted_indices(&self) -> Vec<u64> {
        let n = self.parts.len() as u64;
        self.parts
            .iter()
            .enumerate()
            .map(|(i, &p)| n + p as u64 - (i as u64 + 1))
            .collect()
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", p)?;
        }
        write!(f, ")")
    }
}

/// Every partition with at most `ambient_rank` parts and weight at most
/// `max_weight`, each exactly once, ordered by weight then lexicographic
/// descending. The order is fixed so truncated sums reproduce
/// bit-for-bit for a given cutoff.
pub fn enumerate_partitions(ambient_rank: usize, max_weight: u64) -> Vec<Partition> {
    fn extend(
        slots: usize,
        remaining: u64,
        cap: u32,
        prefix: &mut Vec<u32>,
        out: &mut Vec<Partition>,
    ) {
        if slots == 0 {
            if remaining == 0 {
                out.push(Partition {
                    parts: prefix.clone(),
                });
            }
            return;
        }
        let hi = cap.min(remaining.min(u32::MAX as u64) as u32);
        // descending first part gives lexicographic-descending output
        for p in (0..=hi).rev() {
            prefix.push(p);
            extend(slots - 1, remaining - p as u64, p, prefix, out);
            prefix.pop();
        }
    }

    let mut out = Vec::new();
    for w in 0..=max_weight {
        let mut prefix = Vec::with_capacity(ambient_rank);
        extend(ambient_rank, w, u32::MAX, &mut prefix, &mut out);
    }
    out
}

fn recip_factorial_rational(m: i64) -> BigRational {
    if m < 0 {
        BigRational::zero()
    } else {
        BigRational::new(BigInt::one(), BigInt::from(factorial_exact(m as u64)))
    }
}

/// Exact determinant by Gaussian elimination over the rationals.
fn rational_determinant(n: usize, mut a: Vec<BigRational>) -> BigRational {
    let mut det = BigRational::one();
    for k in 0..n {
        let pivot_row = (k..n).find(|&i| !a[i * n + k].is_zero());
        let Some(pivot_row) = pivot_row else {
            return BigRational::zero();
        };
        if pivot_row != k {
            for j in 0..n {
                a.swap(k * n + j, pivot_row * n + j);
            }
            det = -det;
        }
        let pivot = a[k * n + k].clone();
        det *= pivot.clone();
        for i in k + 1..n {
            if a[i * n + k].is_zero() {
                continue;
            }
            let factor = a[i * n + k].clone() / pivot.clone();
            for j in k + 1..n {
                let sub = factor.clone() * a[k * n + j].clone();
                a[i * n + j] -= sub;
            }
            a[i * n + k] = BigRational::zero();
        }
    }
    det
}

/// Character-expansion coefficient alpha_r^(nu) as an exact rational:
/// the N x N determinant of reciprocal factorials 1/(n_j - nu + i - j)!
/// with 1/m! = 0 for negative m.
pub fn alpha(r: &Partition, nu: u32) -> BigRational {
    let n = r.ambient_rank();
    let mut entries = Vec::with_capacity(n * n);
    for i in 1..=n as i64 {
        for j in 1..=n as i64 {
            let m = r.parts()[(j - 1) as usize] as i64 - nu as i64 + i - j;
            entries.push(recip_factorial_rational(m));
        }
    }
    rational_determinant(n, entries)
}

/// Dimension of the irrep labeled by `r`, computed from the shifted
/// indices as Delta(k_1..k_N) / prod_i (N-i)!.
pub fn dimension(r: &Partition) -> Result<BigUint> {
    let k = r.shifted_indices();
    let n = k.len();
    let mut num = BigInt::one();
    for i in 0..n {
        for j in i + 1..n {
            // k strictly decreasing, every factor positive
            num *= BigInt::from(k[i]) - BigInt::from(k[j]);
        }
    }
    let mut den = BigInt::one();
    for i in 1..=n as u64 {
        den *= BigInt::from(factorial_exact(n as u64 - i));
    }
    let (q, rem) = (num.clone() / den.clone(), num % den);
    if !rem.is_zero() || !q.is_positive() {
        return Err(UgError::numerical(
            "dimension division was not exact; this is a bug",
        ));
    }
    Ok(q.to_biguint().unwrap())
}

/// The ratio alpha_r^(nu) / d_r by the product formula
/// prod_i (N-i)!/(k_i - nu)!, zero when any k_i < nu.
pub fn alpha_over_dim(r: &Partition, nu: u32) -> BigRational {
    let k = r.shifted_indices();
    let n = k.len();
    if k.iter().any(|&ki| ki < nu as u64) {
        return BigRational::zero();
    }
    let mut acc = BigRational::one();
    for (i, &ki) in k.iter().enumerate() {
        let num = BigInt::from(factorial_exact((n - i - 1) as u64));
        let den = BigInt::from(factorial_exact(ki - nu as u64));
        acc *= BigRational::new(num, den);
    }
    acc
}

/// Weyl character (Schur polynomial) of the representation `r` at the
/// given spectrum. Repeated or clustered eigenvalues go through the
/// confluent determinant-ratio engine and stay finite and continuous.
pub fn character(r: &Partition, s: &Spectrum) -> Result<Complex64> {
    if s.source_dim != r.ambient_rank() {
        return Err(UgError::input(format!(
            "spectrum dimension {} does not match partition rank {}",
            s.source_dim,
            r.ambient_rank()
        )));
    }
    // columns in increasing-exponent order so the engine's monomial
    // normalization (z^{j-1} columns -> 1) matches the Weyl denominator
    let mut exponents = r.shifted_indices();
    exponents.reverse();
    let kernels: Vec<SeriesKernel> = exponents
        .iter()
        .map(|&e| SeriesKernel::monomial(e as usize))
        .collect();
    confluent_det_ratio(&kernels, s)
}
