//! Modified Bessel functions of complex argument, exact factorials, and
//! the entire "kernel" functions the closed-form determinants are built
//! from. Every kernel is entire in its argument, so no square roots or
//! branch cuts appear anywhere downstream.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive};

use crate::error::{Result, UgError};

/// Largest |argument| the power-series evaluations accept. Beyond this
/// the series would need thousands of terms or an asymptotic branch,
/// which is out of scope.
pub const SERIES_DOMAIN_BOUND: f64 = 50.0;

/// Relative size at which a series term counts as negligible.
const SERIES_EPS: f64 = 1e-17;

/// Consecutive negligible terms required before truncating.
const SERIES_STREAK: usize = 3;

/// Hard cap on series terms.
pub const SERIES_MAX_TERMS: usize = 400;

/// Exact n! as a big integer.
pub fn factorial_exact(n: u64) -> BigUint {
    let mut acc = BigUint::one();
    for k in 2..=n {
        acc *= k;
    }
    acc
}

fn recip_factorial_table() -> &'static [f64] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // exact big-integer factorials, converted to f64 once; entries
        // underflow to 0 past n ~ 177, which is below every truncation cap
        let mut table = Vec::with_capacity(2 * SERIES_MAX_TERMS);
        let mut acc = BigUint::one();
        for n in 0..2 * SERIES_MAX_TERMS as u64 {
            if n > 0 {
                acc *= n;
            }
            let f = acc.to_f64().unwrap_or(f64::INFINITY);
            table.push(if f.is_finite() { 1.0 / f } else { 0.0 });
        }
        table
    })
}

/// 1/n! as f64, with the convention that the reciprocal factorial of a
/// negative integer is 0. This convention is what makes determinant
/// entries with out-of-range arguments vanish.
pub fn recip_factorial(n: i64) -> f64 {
    if n < 0 {
        return 0.0;
    }
    let table = recip_factorial_table();
    table.get(n as usize).copied().unwrap_or(0.0)
}

/// n! as f64 (exact big-integer product, converted once).
pub fn factorial_f64(n: u64) -> f64 {
    factorial_exact(n).to_f64().unwrap_or(f64::INFINITY)
}

fn check_domain(z: Complex64) -> Result<()> {
    let r = z.norm();
    if !r.is_finite() {
        return Err(UgError::input("non-finite series argument"));
    }
    if r > SERIES_DOMAIN_BOUND {
        return Err(UgError::numerical(format!(
            "|argument| = {:.3} exceeds the series domain bound {}",
            r, SERIES_DOMAIN_BOUND
        )));
    }
    Ok(())
}

/// Sums sum_k coeff(k) * z^k with adaptive truncation: stops after
/// `SERIES_STREAK` consecutive terms below `SERIES_EPS` relative to the
/// running sum, hard-capped at `SERIES_MAX_TERMS`.
fn sum_power_series(z: Complex64, mut coeff: impl FnMut(usize) -> f64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut zk = Complex64::new(1.0, 0.0);
    let mut streak = 0;
    for k in 0..SERIES_MAX_TERMS {
        let term = coeff(k) * zk;
        sum += term;
        if term.norm() < SERIES_EPS * sum.norm().max(f64::MIN_POSITIVE) {
            streak += 1;
            if streak >= SERIES_STREAK {
                break;
            }
        } else {
            streak = 0;
        }
        zk *= z;
    }
    sum
}

/// Modified Bessel function I_order(z) of nonnegative integer order by
/// direct power series. Callers map negative orders through I_n = I_{-n}.
pub fn bessel_i(order: u32, z: Complex64) -> Result<Complex64> {
    check_domain(z)?;
    let half = z / 2.0;
    let q = half * half;
    let series = sum_power_series(q, |k| {
        recip_factorial(k as i64) * recip_factorial(k as i64 + order as i64)
    });
    Ok(half.powu(order) * series)
}

/// Column kernel for the first integral family:
/// G_j(lam) = 2^{-(nu+j-1)} lam^{j-1} sum_k (lam/4)^k / (k! (k+nu+j-1)!),
/// an entire function satisfying mu^{j-1} I_{nu+j-1}(mu) = mu^nu G_j(mu^2).
/// `j` is the 1-based column index.
pub fn kernel_g(j: usize, nu: u32, lam: Complex64) -> Result<Complex64> {
    assert!(j >= 1, "kernel_g column index is 1-based");
    check_domain(lam)?;
    let m = nu as i64 + j as i64 - 1;
    let series = sum_power_series(lam / 4.0, |k| {
        recip_factorial(k as i64) * recip_factorial(k as i64 + m)
    });
    Ok(0.5f64.powi(m as i32) * lam.powu(j as u32 - 1) * series)
}

/// Kernel for the second integral family:
/// H_nu(w) = 2^{-nu} sum_k (w/4)^k / (k! (k+nu)!),
/// satisfying I_nu(x y) = (x y)^nu H_nu(x^2 y^2).
pub fn kernel_h(nu: u32, w: Complex64) -> Result<Complex64> {
    check_domain(w)?;
    let series = sum_power_series(w / 4.0, |k| {
        recip_factorial(k as i64) * recip_factorial(k as i64 + nu as i64)
    });
    Ok(0.5f64.powi(nu as i32) * series)
}

/// A truncated entire function represented by its Maclaurin coefficients.
/// `coeffs[k]` multiplies z^k. The truncation order is chosen by the
/// constructors so the first omitted term is negligible on the disk of
/// the stated radius.
#[derive(Debug, Clone)]
pub struct SeriesKernel {
    pub coeffs: Vec<f64>,
    pub label: String,
}

impl SeriesKernel {
    /// Truncation order (index of the last retained power).
    pub fn truncation_order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Horner evaluation of the truncated series.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Coefficient of z^k, 0 beyond the truncation.
    pub fn coeff(&self, k: i64) -> f64 {
        if k < 0 || k as usize >= self.coeffs.len() {
            0.0
        } else {
            self.coeffs[k as usize]
        }
    }

    fn truncate_for_radius(mut gen: impl FnMut(usize) -> f64, radius: f64, label: String) -> Result<Self> {
        if !(radius.is_finite()) || radius > SERIES_DOMAIN_BOUND {
            return Err(UgError::numerical(format!(
                "kernel radius {:.3} exceeds the series domain bound {}",
                radius, SERIES_DOMAIN_BOUND
            )));
        }
        let r = radius.max(1e-3);
        let mut coeffs = Vec::new();
        let mut scale = 0.0f64;
        let mut rk = 1.0f64;
        let mut streak = 0;
        for k in 0..SERIES_MAX_TERMS {
            let c = gen(k);
            coeffs.push(c);
            let mag = c.abs() * rk;
            scale = scale.max(mag);
            if mag < SERIES_EPS * scale.max(f64::MIN_POSITIVE) {
                streak += 1;
                if streak >= SERIES_STREAK {
                    break;
                }
            } else {
                streak = 0;
            }
            rk *= r;
        }
        Ok(SeriesKernel { coeffs, label })
    }

    /// The G_j column kernel as an explicit coefficient vector, truncated
    /// for arguments on the disk |lam| <= radius.
    pub fn g_column(j: usize, nu: u32, radius: f64) -> Result<Self> {
        assert!(j >= 1);
        let m = nu as i64 + j as i64 - 1;
        let pref = 0.5f64.powi(m as i32);
        let gen = move |p: usize| {
            // coefficient of lam^p: nonzero for p >= j-1
            let k = p as i64 - (j as i64 - 1);
            if k < 0 {
                0.0
            } else {
                pref * 0.25f64.powi(k as i32) * recip_factorial(k) * recip_factorial(p as i64 + nu as i64)
            }
        };
        Self::truncate_for_radius(gen, radius, format!("G_{}(nu={})", j, nu))
    }

    /// Diagonal coefficients of H_nu(lam * kap) viewed as
    /// sum_k c_k lam^k kap^k, truncated for |lam*kap| <= radius.
    pub fn h_diagonal(nu: u32, radius: f64) -> Result<Self> {
        let pref = 0.5f64.powi(nu as i32);
        let gen = move |k: usize| {
            pref * 0.25f64.powi(k as i32)
                * recip_factorial(k as i64)
                * recip_factorial(k as i64 + nu as i64)
        };
        Self::truncate_for_radius(gen, radius, format!("H(nu={})", nu))
    }

    /// Diagonal coefficients of exp(lam * kap): c_k = 1/k!.
    pub fn exp_diagonal(radius: f64) -> Result<Self> {
        Self::truncate_for_radius(|k| recip_factorial(k as i64), radius, "exp".to_string())
    }

    /// The monomial z^k (used by character evaluation).
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = 1.0;
        SeriesKernel {
            coeffs,
            label: format!("z^{}", k),
        }
    }
}
