//! Dense complex linear algebra: products, determinants, eigenvalues of
//! general (nonhermitian, possibly defective) matrices, and Vandermonde
//! products. Everything the closed-form evaluators consume.

use num_complex::Complex64;

use crate::error::{Result, UgError};

/// Dense rectangular complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

/// Unordered multiset of eigenvalues together with clustering metadata.
///
/// `min_gap` is the smallest pairwise distance; it drives the switch to
/// the confluent (divided-difference) evaluation path downstream. It is
/// `f64::INFINITY` for a single eigenvalue.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<Complex64>,
    pub source_dim: usize,
    pub min_gap: f64,
}

impl Spectrum {
    pub fn from_values(values: Vec<Complex64>) -> Self {
        let min_gap = min_pairwise_gap(&values);
        Spectrum {
            source_dim: values.len(),
            values,
            min_gap,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn min_pairwise_gap(values: &[Complex64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            gap = gap.min((values[i] - values[j]).norm());
        }
    }
    gap
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(UgError::input("matrix dimensions must be positive"));
        }
        if entries.len() != rows * cols {
            return Err(UgError::input(format!(
                "entry count {} does not match {}x{}",
                entries.len(),
                rows,
                cols
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(UgError::input("matrix entries must be finite"));
        }
        Ok(ComplexMatrix { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, entries }
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                values[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Entrywise scaling by a complex factor.
    pub fn scaled(&self, factor: Complex64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(UgError::input(format!(
                "dimension mismatch in product: {}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Determinant by pivoted Gaussian elimination.
    pub fn determinant(&self) -> Result<Complex64> {
        if !self.is_square() {
            return Err(UgError::input("determinant requires a square matrix"));
        }
        let n = self.rows;
        let mut a = self.entries.clone();
        let mut det = Complex64::new(1.0, 0.0);
        for k in 0..n {
            // partial pivoting on column k
            let mut pivot = k;
            let mut best = a[k * n + k].norm();
            for i in k + 1..n {
                let v = a[i * n + k].norm();
                if v > best {
                    best = v;
                    pivot = i;
                }
            }
            if best == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            if pivot != k {
                for j in 0..n {
                    a.swap(k * n + j, pivot * n + j);
                }
                det = -det;
            }
            let pkk = a[k * n + k];
            det *= pkk;
            for i in k + 1..n {
                let factor = a[i * n + k] / pkk;
                if factor == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..n {
                    let akj = a[k * n + j];
                    a[i * n + j] -= factor * akj;
                }
            }
        }
        Ok(det)
    }

    /// All eigenvalues of a square complex matrix, via unitary reduction
    /// to upper Hessenberg form followed by shifted QR iteration with
    /// deflation. Handles defective and nonnormal inputs.
    pub fn eigenvalues(&self) -> Result<Spectrum> {
        if !self.is_square() {
            return Err(UgError::input("eigenvalues require a square matrix"));
        }
        let n = self.rows;
        if n == 1 {
            return Ok(Spectrum::from_values(vec![self[(0, 0)]]));
        }
        let mut h = hessenberg(self);
        let values = qr_eigenvalues(&mut h, n)?;
        Ok(Spectrum::from_values(values))
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.cols + j]
    }
}

/// Vandermonde product with the convention prod_{i<j} (x_i - x_j).
///
/// Returns 1 for a single value (empty product) and 0 on repeats.
pub fn vandermonde(values: &[Complex64]) -> Complex64 {
    let mut prod = Complex64::new(1.0, 0.0);
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            prod *= values[i] - values[j];
        }
    }
    prod
}

/// Vandermonde product with the determinant convention
/// prod_{i<j} (x_j - x_i), equal to det[x_i^{j-1}].
pub fn vandermonde_det(values: &[Complex64]) -> Complex64 {
    let mut prod = Complex64::new(1.0, 0.0);
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            prod *= values[j] - values[i];
        }
    }
    prod
}

/// Unitary similarity reduction to upper Hessenberg form (Householder).
fn hessenberg(m: &ComplexMatrix) -> Vec<Complex64> {
    let n = m.rows();
    let mut h = m.entries().to_vec();
    for k in 0..n.saturating_sub(2) {
        // Householder vector for column k, rows k+1..n
        let mut norm_sq = 0.0;
        for i in k + 1..n {
            norm_sq += h[i * n + k].norm_sqr();
        }
        let x0 = h[(k + 1) * n + k];
        let norm = norm_sq.sqrt();
        if norm <= f64::EPSILON * 1e-2 * (1.0 + x0.norm()) {
            continue;
        }
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[k + 1] = x0 - alpha;
        for i in k + 2..n {
            v[i] = h[i * n + k];
        }
        let vnorm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm_sq;
        // H <- (I - beta v v*) H
        for j in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for i in k + 1..n {
                dot += v[i].conj() * h[i * n + j];
            }
            dot *= beta;
            for i in k + 1..n {
                h[i * n + j] -= v[i] * dot;
            }
        }
        // H <- H (I - beta v v*)
        for i in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for j in k + 1..n {
                dot += h[i * n + j] * v[j];
            }
            dot *= beta;
            for j in k + 1..n {
                h[i * n + j] -= dot * v[j].conj();
            }
        }
        h[(k + 1) * n + k] = alpha;
        for i in k + 2..n {
            h[i * n + k] = Complex64::new(0.0, 0.0);
        }
    }
    h
}

/// Wilkinson shift: the eigenvalue of the trailing 2x2 block closest to
/// its lower-right entry.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - 4.0 * det).sqrt();
    let l1 = (tr + disc) / 2.0;
    let l2 = (tr - disc) / 2.0;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Complex Givens rotation zeroing b: returns (c, s) with c real such that
/// [c s; -conj(s) c] [a; b] = [r; 0].
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    let r = na.hypot(nb);
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let alpha = a / na;
    (na / r, alpha * b.conj() / r)
}

/// Shifted explicit QR iteration with deflation on an upper Hessenberg
/// matrix stored row-major in `h`. Consumes the matrix.
fn qr_eigenvalues(h: &mut [Complex64], n: usize) -> Result<Vec<Complex64>> {
    let max_sweeps = 100 * n;
    let mut sweeps = 0usize;
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n; // active block occupies 0..hi
    let mut stagnation = 0usize;

    while hi > 0 {
        // zero out negligible subdiagonals
        for i in 1..hi {
            let tol = f64::EPSILON * (h[(i - 1) * n + i - 1].norm() + h[i * n + i].norm());
            if h[i * n + i - 1].norm() <= tol {
                h[i * n + i - 1] = Complex64::new(0.0, 0.0);
            }
        }
        if hi == 1 || h[(hi - 1) * n + hi - 2] == Complex64::new(0.0, 0.0) {
            eigs.push(h[(hi - 1) * n + hi - 1]);
            hi -= 1;
            stagnation = 0;
            continue;
        }
        // active window [lo, hi)
        let mut lo = hi - 1;
        while lo > 0 && h[lo * n + lo - 1] != Complex64::new(0.0, 0.0) {
            lo -= 1;
        }
        sweeps += 1;
        stagnation += 1;
        if sweeps > max_sweeps {
            return Err(UgError::numerical(format!(
                "QR iteration did not converge within {} sweeps",
                max_sweeps
            )));
        }
        let mut shift = wilkinson_shift(
            h[(hi - 2) * n + hi - 2],
            h[(hi - 2) * n + hi - 1],
            h[(hi - 1) * n + hi - 2],
            h[(hi - 1) * n + hi - 1],
        );
        if stagnation > 0 && stagnation % 12 == 0 {
            // exceptional shift to break symmetric stalls
            let kick = h[(hi - 1) * n + hi - 2].norm() + h[(hi - 1) * n + hi - 1].norm();
            shift += Complex64::new(0.75 * kick, 0.25 * kick);
        }
        for d in lo..hi {
            h[d * n + d] -= shift;
        }
        // QR factorization of the window by Givens rotations, then RQ
        let mut rots = Vec::with_capacity(hi - lo - 1);
        for i in lo..hi - 1 {
            let (c, s) = givens(h[i * n + i], h[(i + 1) * n + i]);
            for j in i..hi {
                let x = h[i * n + j];
                let y = h[(i + 1) * n + j];
                h[i * n + j] = c * x + s * y;
                h[(i + 1) * n + j] = -s.conj() * x + c * y;
            }
            h[(i + 1) * n + i] = Complex64::new(0.0, 0.0);
            rots.push((c, s));
        }
        for (idx, (c, s)) in rots.iter().enumerate() {
            let col = lo + idx;
            for i in lo..=(col + 1).min(hi - 1) {
                let x = h[i * n + col];
                let y = h[i * n + col + 1];
                h[i * n + col] = x * c + y * s.conj();
                h[i * n + col + 1] = -x * *s + y * c;
            }
        }
        for d in lo..hi {
            h[d * n + d] += shift;
        }
    }
    Ok(eigs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    /// Minimal-distance greedy pairing of two eigenvalue multisets.
    fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
        assert_eq!(a.len(), b.len());
        let mut remaining: Vec<Complex64> = b.to_vec();
        let mut worst: f64 = 0.0;
        for &x in a {
            let (idx, d) = remaining
                .iter()
                .enumerate()
                .map(|(i, &y)| (i, (x - y).norm()))
                .min_by(|p, q| p.1.partial_cmp(&q.1).unwrap())
                .unwrap();
            worst = worst.max(d);
            remaining.swap_remove(idx);
        }
        worst
    }

    #[test]
    fn matmul_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_matrix(2, &mut rng);
        let id = ComplexMatrix::identity(2);
        assert_eq!(id.matmul(&x).unwrap(), x);
    }

    #[test]
    fn matmul_diagonal() {
        let a = ComplexMatrix::diagonal(&[c(2.0, 0.0), c(3.0, 0.0)]);
        let b = ComplexMatrix::diagonal(&[c(5.0, 0.0), c(7.0, 0.0)]);
        let p = a.matmul(&b).unwrap();
        assert_eq!(p, ComplexMatrix::diagonal(&[c(10.0, 0.0), c(21.0, 0.0)]));
    }

    #[test]
    fn matmul_matches_naive_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_matrix(3, &mut rng);
        let b = random_matrix(3, &mut rng);
        let p = a.matmul(&b).unwrap();
        // independent naive multiply
        for i in 0..3 {
            for j in 0..3 {
                let mut s = c(0.0, 0.0);
                for k in 0..3 {
                    s += a[(i, k)] * b[(k, j)];
                }
                assert_eq!(p[(i, j)], s);
            }
        }
    }

    #[test]
    fn matmul_dimension_mismatch() {
        let a = ComplexMatrix::zeros(2, 3);
        let b = ComplexMatrix::zeros(2, 2);
        assert!(a.matmul(&b).is_err());
    }

    #[test]
    fn determinant_identity() {
        let d = ComplexMatrix::identity(4).determinant().unwrap();
        assert!((d - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn determinant_permutation_parity() {
        let m = ComplexMatrix::new(2, 2, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        let d = m.determinant().unwrap();
        assert!((d - c(-1.0, 0.0)).norm() < 1e-15);
    }

    /// Cofactor (Laplace) expansion, the independent determinant oracle.
    fn cofactor_det(m: &ComplexMatrix) -> Complex64 {
        let n = m.rows();
        if n == 1 {
            return m[(0, 0)];
        }
        let mut acc = c(0.0, 0.0);
        let mut sign = 1.0;
        for j in 0..n {
            let minor = ComplexMatrix::from_fn(n - 1, n - 1, |r, s| {
                m[(r + 1, if s < j { s } else { s + 1 })]
            });
            acc += sign * m[(0, j)] * cofactor_det(&minor);
            sign = -sign;
        }
        acc
    }

    #[test]
    fn determinant_vs_cofactor_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_matrix(4, &mut rng);
        let lu = m.determinant().unwrap();
        let co = cofactor_det(&m);
        assert!((lu - co).norm() / co.norm() < 1e-12);
    }

    #[test]
    fn determinant_non_square_rejected() {
        assert!(ComplexMatrix::zeros(2, 3).determinant().is_err());
    }

    #[test]
    fn eigenvalues_diagonal() {
        let m = ComplexMatrix::diagonal(&[c(1.0, 2.0), c(3.0, 0.0)]);
        let s = m.eigenvalues().unwrap();
        assert!(multiset_distance(&s.values, &[c(1.0, 2.0), c(3.0, 0.0)]) < 1e-12);
    }

    #[test]
    fn eigenvalues_defective_jordan_block() {
        let m = ComplexMatrix::new(2, 2, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        let s = m.eigenvalues().unwrap();
        assert!(multiset_distance(&s.values, &[c(0.0, 0.0), c(0.0, 0.0)]) < 1e-8);
    }

    #[test]
    fn eigenvalues_trace_and_determinant_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = random_matrix(5, &mut rng);
        let s = m.eigenvalues().unwrap();
        let sum: Complex64 = s.values.iter().sum();
        let prod: Complex64 = s.values.iter().product();
        let tr = m.trace();
        let det = m.determinant().unwrap();
        assert!((sum - tr).norm() / tr.norm().max(1.0) < 1e-10);
        assert!((prod - det).norm() / det.norm().max(1.0) < 1e-10);
    }

    #[test]
    fn eigenvalues_similarity_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let m = random_matrix(4, &mut rng);
            // well-conditioned S: identity plus a small random perturbation
            let s = ComplexMatrix::from_fn(4, 4, |i, j| {
                let base = if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) };
                base + c(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2))
            });
            let sinv = invert(&s);
            let sim = s.matmul(&m).unwrap().matmul(&sinv).unwrap();
            let e1 = m.eigenvalues().unwrap();
            let e2 = sim.eigenvalues().unwrap();
            assert!(multiset_distance(&e1.values, &e2.values) < 1e-8);
        }
    }

    #[test]
    fn eigenvalues_ab_vs_ba() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random_matrix(4, &mut rng);
        let b = random_matrix(4, &mut rng);
        let ab = a.matmul(&b).unwrap().eigenvalues().unwrap();
        let ba = b.matmul(&a).unwrap().eigenvalues().unwrap();
        assert!(multiset_distance(&ab.values, &ba.values) < 1e-8);
    }

    // Gauss-Jordan inverse, test-only helper.
    fn invert(m: &ComplexMatrix) -> ComplexMatrix {
        let n = m.rows();
        let mut a: Vec<Vec<Complex64>> = (0..n)
            .map(|i| {
                let mut row: Vec<Complex64> = (0..n).map(|j| m[(i, j)]).collect();
                row.extend((0..n).map(|j| {
                    if i == j {
                        c(1.0, 0.0)
                    } else {
                        c(0.0, 0.0)
                    }
                }));
                row
            })
            .collect();
        for k in 0..n {
            let pivot = (k..n).max_by(|&p, &q| {
                a[p][k].norm().partial_cmp(&a[q][k].norm()).unwrap()
            }).unwrap();
            a.swap(k, pivot);
            let pk = a[k][k];
            for j in 0..2 * n {
                a[k][j] /= pk;
            }
            for i in 0..n {
                if i == k {
                    continue;
                }
                let f = a[i][k];
                for j in 0..2 * n {
                    let v = a[k][j];
                    a[i][j] -= f * v;
                }
            }
        }
        ComplexMatrix::from_fn(n, n, |i, j| a[i][n + j])
    }

    #[test]
    fn determinant_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=6 {
            let a = random_matrix(n, &mut rng);
            let b = random_matrix(n, &mut rng);
            let dab = a.matmul(&b).unwrap().determinant().unwrap();
            let d = a.determinant().unwrap() * b.determinant().unwrap();
            assert!((dab - d).norm() / d.norm().max(1e-30) < 1e-10);
        }
    }

    #[test]
    fn vandermonde_basics() {
        assert_eq!(vandermonde(&[c(5.0, 1.0)]), c(1.0, 0.0));
        assert_eq!(vandermonde(&[c(3.0, 0.0), c(1.0, 0.0)]), c(2.0, 0.0));
        let x = c(0.3, 0.7);
        assert_eq!(vandermonde(&[x, x, c(1.0, 0.0)]), c(0.0, 0.0));
    }

    #[test]
    fn vandermonde_permutation_sign() {
        // Gaussian integers keep every partial product exact in f64, so
        // the sign relation holds with no rounding slack.
        let vals = [c(1.0, 0.0), c(2.0, 1.0), c(-1.0, 3.0), c(0.0, -2.0)];
        let base = vandermonde(&vals);
        // odd permutation: swap first two
        let swapped = [vals[1], vals[0], vals[2], vals[3]];
        assert_eq!(vandermonde(&swapped), -base);
        // even permutation: 3-cycle
        let cycled = [vals[1], vals[2], vals[0], vals[3]];
        assert_eq!(vandermonde(&cycled), base);
    }

    #[test]
    fn spectrum_min_gap() {
        let s = Spectrum::from_values(vec![c(0.0, 0.0), c(1.0, 0.0), c(1.5, 0.0)]);
        assert!((s.min_gap - 0.5).abs() < 1e-15);
        let single = Spectrum::from_values(vec![c(1.0, 0.0)]);
        assert!(single.min_gap.is_infinite());
    }

    #[test]
    fn rejects_nonfinite_entries() {
        assert!(ComplexMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]).is_err());
        assert!(ComplexMatrix::new(1, 1, vec![c(0.0, f64::INFINITY)]).is_err());
    }
}
