//! Two independent ground-truth paths for the closed forms: Monte Carlo
//! integration over Haar-distributed unitaries, and truncated
//! character-expansion series with exact rational coefficients.
//!
//! Monte Carlo runs are sharded: shard s derives its own generator from
//! (seed, s), shards may evaluate concurrently, and the reduction is in
//! fixed shard order, so results are bit-identical for a given seed
//! regardless of thread count.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::characters::{alpha_over_dim, character, dimension, enumerate_partitions, Partition};
use crate::error::{Result, UgError};
use crate::linalg::ComplexMatrix;

/// Samples per Monte Carlo shard. Part of the deterministic shard
/// layout; changing it changes every estimate bit pattern.
pub const SHARD_SIZE: u64 = 4096;

/// Frobenius-norm threshold above which MC variance makes 4-sigma bands
/// meaningless for desk-scale sample counts.
pub const NORM_GUARD: f64 = 2.0;

/// Monte Carlo sample mean with per-component standard errors.
#[derive(Debug, Clone)]
pub struct MCEstimate {
    pub mean: Complex64,
    pub stderr_re: f64,
    pub stderr_im: f64,
    pub samples: u64,
    pub seed: u64,
}

impl MCEstimate {
    /// z-scores of the estimate against a reference value.
    pub fn z_scores(&self, reference: Complex64) -> (f64, f64) {
        let z = |diff: f64, se: f64| {
            if diff == 0.0 {
                0.0
            } else if se == 0.0 {
                f64::INFINITY
            } else {
                diff.abs() / se
            }
        };
        (
            z(self.mean.re - reference.re, self.stderr_re),
            z(self.mean.im - reference.im, self.stderr_im),
        )
    }
}

/// Truncated character-expansion partial sum.
#[derive(Debug, Clone)]
pub struct SeriesEstimate {
    pub value: Complex64,
    pub max_weight: u64,
    /// Sum of |term| over the shell of weight exactly `max_weight`.
    pub last_shell_magnitude: f64,
}

/// True when any input exceeds the Frobenius-norm guard; callers should
/// downgrade confidence in 4-sigma comparisons.
pub fn norm_guard_triggered(inputs: &[&ComplexMatrix]) -> bool {
    inputs.iter().any(|m| m.frobenius_norm() > NORM_GUARD)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(shard)))
}

/// Standard complex Gaussian via Box-Muller (unit variance per complex
/// entry: re and im each N(0, 1/2)).
fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (-u1.ln()).sqrt();
    Complex64::new(r * u2.cos(), r * u2.sin())
}

/// Haar-distributed unitary: orthonormalize a Ginibre matrix by modified
/// Gram-Schmidt with one reorthogonalization pass. The triangular
/// factor's diagonal comes out real positive, so no further phase
/// correction is needed for Haar invariance.
pub fn sample_haar(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    loop {
        // columns of the Ginibre draw
        let mut cols: Vec<Vec<Complex64>> =
            (0..n).map(|_| (0..n).map(|_| complex_gaussian(rng)).collect()).collect();
        let mut ok = true;
        'gs: for j in 0..n {
            for _pass in 0..2 {
                for i in 0..j {
                    let proj: Complex64 = (0..n).map(|k| cols[i][k].conj() * cols[j][k]).sum();
                    for k in 0..n {
                        let s = proj * cols[i][k];
                        cols[j][k] -= s;
                    }
                }
            }
            let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                // near-dependent draw (measure zero); resample
                ok = false;
                break 'gs;
            }
            for k in 0..n {
                cols[j][k] /= norm;
            }
        }
        if !ok {
            continue;
        }
        let u = ComplexMatrix::from_fn(n, n, |i, j| cols[j][i]);
        #[cfg(debug_assertions)]
        {
            let gram = u.dagger().matmul(&u).unwrap();
            let id = ComplexMatrix::identity(n);
            let dev = (0..n * n)
                .map(|k| (gram.entries()[k] - id.entries()[k]).norm())
                .fold(0.0, f64::max);
            debug_assert!(dev <= 1e-12, "Haar sample unitarity violated: {}", dev);
        }
        return u;
    }
}

/// tr(A X) without forming the product.
fn trace_product(a: &ComplexMatrix, x: &ComplexMatrix) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            acc += a[(i, j)] * x[(j, i)];
        }
    }
    acc
}

fn int_pow(z: Complex64, p: i64) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    let base = if p >= 0 { z } else { 1.0 / z };
    for _ in 0..p.unsigned_abs() {
        acc *= base;
    }
    acc
}

/// Numerically stable single-pass accumulator (Welford) per component.
#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    count: u64,
    mean_re: f64,
    mean_im: f64,
    m2_re: f64,
    m2_im: f64,
}

impl Accumulator {
    fn push(&mut self, z: Complex64) {
        self.count += 1;
        let n = self.count as f64;
        let d_re = z.re - self.mean_re;
        let d_im = z.im - self.mean_im;
        self.mean_re += d_re / n;
        self.mean_im += d_im / n;
        self.m2_re += d_re * (z.re - self.mean_re);
        self.m2_im += d_im * (z.im - self.mean_im);
    }

    /// Chan's parallel combination, applied in fixed shard order.
    fn merge(self, other: Accumulator) -> Accumulator {
        if other.count == 0 {
            return self;
        }
        if self.count == 0 {
            return other;
        }
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;
        let d_re = other.mean_re - self.mean_re;
        let d_im = other.mean_im - self.mean_im;
        Accumulator {
            count: self.count + other.count,
            mean_re: self.mean_re + d_re * nb / n,
            mean_im: self.mean_im + d_im * nb / n,
            m2_re: self.m2_re + other.m2_re + d_re * d_re * na * nb / n,
            m2_im: self.m2_im + other.m2_im + d_im * d_im * na * nb / n,
        }
    }

    fn finish(self, seed: u64) -> MCEstimate {
        let n = self.count as f64;
        let denom = if self.count > 1 { n * (n - 1.0) } else { 1.0 };
        MCEstimate {
            mean: Complex64::new(self.mean_re, self.mean_im),
            stderr_re: (self.m2_re / denom).sqrt(),
            stderr_im: (self.m2_im / denom).sqrt(),
            samples: self.count,
            seed,
        }
    }
}

/// Shard-deterministic Monte Carlo mean of `integrand` over Haar draws.
fn mc_run(
    samples: u64,
    seed: u64,
    integrand: impl Fn(&mut ChaCha8Rng) -> Complex64 + Sync,
) -> MCEstimate {
    let shards = samples.div_ceil(SHARD_SIZE);
    let partials: Vec<Accumulator> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = shard_rng(seed, s);
            let count = SHARD_SIZE.min(samples - s * SHARD_SIZE);
            let mut acc = Accumulator::default();
            for _ in 0..count {
                acc.push(integrand(&mut rng));
            }
            acc
        })
        .collect();
    partials
        .into_iter()
        .fold(Accumulator::default(), Accumulator::merge)
        .finish(seed)
}

fn check_mc_inputs(samples: u64) -> Result<()> {
    if samples < 100 {
        return Err(UgError::input("Monte Carlo needs at least 100 samples"));
    }
    Ok(())
}

/// Direct Haar average of det^nu(U) exp(tr(AU + BU^dag)/2).
pub fn mc_i1(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    nu: i64,
    samples: u64,
    seed: u64,
) -> Result<MCEstimate> {
    let n = a.rows();
    if !a.is_square() || !b.is_square() || b.rows() != n {
        return Err(UgError::input("mc_i1 requires square matrices of equal size"));
    }
    check_mc_inputs(samples)?;
    Ok(mc_run(samples, seed, |rng| {
        let u = sample_haar(n, rng);
        let det_w = if nu == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            int_pow(u.determinant().unwrap(), nu)
        };
        let expo = (trace_product(a, &u) + trace_product(b, &u.dagger())) / 2.0;
        det_w * expo.exp()
    }))
}

/// Double Haar average of det^nu(UV) exp(tr(UAVB + CV^dag DU^dag)/2).
pub fn mc_i2(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    d: &ComplexMatrix,
    nu: i64,
    samples: u64,
    seed: u64,
) -> Result<MCEstimate> {
    let n = a.rows();
    for m in [a, b, c, d] {
        if !m.is_square() || m.rows() != n {
            return Err(UgError::input("mc_i2 requires four square matrices of equal size"));
        }
    }
    check_mc_inputs(samples)?;
    Ok(mc_run(samples, seed, |rng| {
        let u = sample_haar(n, rng);
        let v = sample_haar(n, rng);
        let det_w = if nu == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            int_pow(u.determinant().unwrap() * v.determinant().unwrap(), nu)
        };
        let uavb = u
            .matmul(a)
            .and_then(|m| m.matmul(&v))
            .and_then(|m| m.matmul(b))
            .unwrap();
        let cvdu = c
            .matmul(&v.dagger())
            .and_then(|m| m.matmul(d))
            .and_then(|m| m.matmul(&u.dagger()))
            .unwrap();
        let expo = (uavb.trace() + cvdu.trace()) / 2.0;
        det_w * expo.exp()
    }))
}

/// Haar average of exp(tr(AUBU^dag)) (no 1/2 in the exponent).
pub fn mc_i3(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    samples: u64,
    seed: u64,
) -> Result<MCEstimate> {
    let n = a.rows();
    if !a.is_square() || !b.is_square() || b.rows() != n {
        return Err(UgError::input("mc_i3 requires square matrices of equal size"));
    }
    check_mc_inputs(samples)?;
    Ok(mc_run(samples, seed, |rng| {
        let u = sample_haar(n, rng);
        let aubu = a
            .matmul(&u)
            .and_then(|m| m.matmul(b))
            .and_then(|m| m.matmul(&u.dagger()))
            .unwrap();
        aubu.trace().exp()
    }))
}

/// Rectangular double Haar average of
/// det^nu(U) det^eta(V) exp(tr(UAVB + CV^dag DU^dag)/2) with U over
/// U(N) and V over U(M), M < N. Confirms the vanishing theorems and, at
/// nu = eta = 0, the rectangular conjecture.
#[allow(clippy::too_many_arguments)]
pub fn mc_i2_rect_det(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    d: &ComplexMatrix,
    nu: i64,
    eta: i64,
    samples: u64,
    seed: u64,
) -> Result<MCEstimate> {
    let n = a.rows();
    let m = a.cols();
    if m >= n {
        return Err(UgError::input("mc_i2_rect_det requires M < N"));
    }
    if b.rows() != m || b.cols() != n || c.rows() != n || c.cols() != m || d.rows() != m
        || d.cols() != n
    {
        return Err(UgError::input(
            "mc_i2_rect_det shape contract: a,c are NxM and b,d are MxN",
        ));
    }
    check_mc_inputs(samples)?;
    Ok(mc_run(samples, seed, |rng| {
        let u = sample_haar(n, rng);
        let v = sample_haar(m, rng);
        let mut det_w = Complex64::new(1.0, 0.0);
        if nu != 0 {
            det_w *= int_pow(u.determinant().unwrap(), nu);
        }
        if eta != 0 {
            det_w *= int_pow(v.determinant().unwrap(), eta);
        }
        let uavb = u
            .matmul(a)
            .and_then(|p| p.matmul(&v))
            .and_then(|p| p.matmul(b))
            .unwrap();
        let cvdu = c
            .matmul(&v.dagger())
            .and_then(|p| p.matmul(d))
            .and_then(|p| p.matmul(&u.dagger()))
            .unwrap();
        let expo = (uavb.trace() + cvdu.trace()) / 2.0;
        det_w * expo.exp()
    }))
}

/// Character-series coefficient table for one integral family, cached
/// per (rank, nu, max_weight). Reads are concurrent; writes are
/// idempotent.
fn series_terms(rank: usize, nu: u32, max_weight: u64) -> std::sync::Arc<Vec<(Partition, f64, f64)>> {
    use std::collections::HashMap;
    use std::sync::{Arc, Mutex, OnceLock};
    type Cache = Mutex<HashMap<(usize, u32, u64), Arc<Vec<(Partition, f64, f64)>>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&(rank, nu, max_weight)) {
        return hit.clone();
    }
    let mut terms = Vec::new();
    for r in enumerate_partitions(rank, max_weight) {
        // coefficients for I1: (alpha^(0)/d) alpha^(nu) = aod0 * aodnu * d;
        // for I2: alpha^(nu) alpha^(0) / d^2 = aod0 * aodnu.
        let aod0 = alpha_over_dim(&r, 0);
        let aodnu = if nu == 0 {
            aod0.clone()
        } else {
            alpha_over_dim(&r, nu)
        };
        if aod0.is_zero() || aodnu.is_zero() {
            continue;
        }
        let d = BigRational::new(BigInt::from(dimension(&r).unwrap()), BigInt::one());
        let pair = aod0 * aodnu;
        let coeff_i2 = pair.to_f64().unwrap();
        let coeff_i1 = (pair * d).to_f64().unwrap();
        terms.push((r, coeff_i1, coeff_i2));
    }
    let arc = Arc::new(terms);
    cache
        .lock()
        .unwrap()
        .entry((rank, nu, max_weight))
        .or_insert_with(|| arc.clone());
    arc
}

fn det_pow_checked(det: Complex64, nu: u32, what: &str) -> Result<Complex64> {
    if nu > 0 && det.norm() == 0.0 {
        return Err(UgError::numerical(format!(
            "series oracle needs invertible {} when nu > 0",
            what
        )));
    }
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..nu {
        acc *= det;
    }
    Ok(acc)
}

/// Truncated character-expansion series for the first integral family:
/// sum over |r| <= max_weight of (alpha_r^(0)/d_r) alpha_r^(nu)
/// chi_r(AB/4), normalized back to the 1/2-exponent convention.
pub fn series_i1(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    nu: u32,
    max_weight: u64,
) -> Result<SeriesEstimate> {
    let n = a.rows();
    if !a.is_square() || !b.is_square() || b.rows() != n {
        return Err(UgError::input("series_i1 requires square matrices of equal size"));
    }
    let half = Complex64::new(0.5, 0.0);
    let product = a.scaled(half).matmul(&b.scaled(half))?;
    let spectrum = product.eigenvalues()?;
    let terms = series_terms(n, nu, max_weight);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut shell = 0.0;
    for (r, coeff_i1, _) in terms.iter() {
        let term = *coeff_i1 * character(r, &spectrum)?;
        sum += term;
        if r.weight() == max_weight {
            shell += term.norm();
        }
    }
    let scale = det_pow_checked(a.scaled(half).determinant()?, nu, "A")?;
    Ok(SeriesEstimate {
        value: sum / scale,
        max_weight,
        last_shell_magnitude: shell,
    })
}

/// Truncated character-expansion series for the second integral family:
/// sum over |r| <= max_weight of (alpha_r^(nu) alpha_r^(0) / d_r^2)
/// chi_r(AD/2) chi_r(BC/2), normalized back to the 1/2-exponent
/// convention.
pub fn series_i2(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    d: &ComplexMatrix,
    nu: u32,
    max_weight: u64,
) -> Result<SeriesEstimate> {
    let n = a.rows();
    for m in [a, b, c, d] {
        if !m.is_square() || m.rows() != n {
            return Err(UgError::input("series_i2 requires four square matrices of equal size"));
        }
    }
    let half = Complex64::new(0.5, 0.0);
    let ad = a.matmul(d)?.scaled(half);
    let bc = b.matmul(c)?.scaled(half);
    let spec_ad = ad.eigenvalues()?;
    let spec_bc = bc.eigenvalues()?;
    let terms = series_terms(n, nu, max_weight);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut shell = 0.0;
    for (r, _, coeff_i2) in terms.iter() {
        let term = *coeff_i2 * character(r, &spec_ad)? * character(r, &spec_bc)?;
        sum += term;
        if r.weight() == max_weight {
            shell += term.norm();
        }
    }
    // rescaling A,B by 1/sqrt(2) contributes (det(A)det(B))^nu 2^{-N nu}
    let scale = det_pow_checked(a.determinant()? * b.determinant()?, nu, "A and B")?
        * 2f64.powi(-((n as i32) * nu as i32));
    Ok(SeriesEstimate {
        value: sum / scale,
        max_weight,
        last_shell_magnitude: shell,
    })
}
