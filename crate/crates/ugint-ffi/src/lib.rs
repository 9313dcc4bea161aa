//! C ABI over the integral evaluators: opaque matrix handles, integer
//! status codes, and a thread-local last-error message. The header is
//! generated into `include/ugint.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CString};

use num_complex::Complex64;
use ugint::error::UgError;
use ugint::integrals::{eval_i1, eval_i2, eval_i2_rect, eval_i3, IntegralResult};
use ugint::linalg::ComplexMatrix;

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UgStatus {
    /// Success.
    UgOk = 0,
    /// Invalid argument (shape mismatch, non-finite entry, null pointer).
    UgErrInput = 1,
    /// Numerical failure (overflow or domain bound exceeded).
    UgErrNumerical = 2,
}

/// Opaque matrix handle; create with `ug_matrix_new`, release with
/// `ug_matrix_free`.
pub struct UgMatrix {
    inner: ComplexMatrix,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(sanitized).unwrap());
}

fn fail(e: UgError) -> UgStatus {
    let status = match e {
        UgError::Input(_) => UgStatus::UgErrInput,
        UgError::Numerical(_) => UgStatus::UgErrNumerical,
    };
    set_error(&e.to_string());
    status
}

/// Message describing the most recent failure on this thread. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ug_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Create a rows x cols matrix from `2 * rows * cols` doubles laid out
/// row-major as re, im pairs. Returns null on invalid input (consult
/// `ug_last_error`).
///
/// # Safety
/// `interleaved` must point to at least `2 * rows * cols` readable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn ug_matrix_new(
    rows: usize,
    cols: usize,
    interleaved: *const f64,
) -> *mut UgMatrix {
    if interleaved.is_null() {
        set_error("ug_matrix_new: null data pointer");
        return std::ptr::null_mut();
    }
    let len = match rows.checked_mul(cols) {
        Some(len) if len > 0 => len,
        _ => {
            set_error("ug_matrix_new: dimensions must be positive");
            return std::ptr::null_mut();
        }
    };
    let raw = std::slice::from_raw_parts(interleaved, 2 * len);
    let entries = raw.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
    match ComplexMatrix::new(rows, cols, entries) {
        Ok(inner) => Box::into_raw(Box::new(UgMatrix { inner })),
        Err(e) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Release a handle returned by `ug_matrix_new`. Null is a no-op.
///
/// # Safety
/// `m` must be null or a pointer previously returned by
/// `ug_matrix_new` that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ug_matrix_free(m: *mut UgMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

unsafe fn deref<'a>(p: *const UgMatrix, name: &str) -> Result<&'a ComplexMatrix, UgStatus> {
    if p.is_null() {
        set_error(&format!("null matrix handle for {}", name));
        return Err(UgStatus::UgErrInput);
    }
    Ok(&(*p).inner)
}

unsafe fn write_value(
    result: Result<IntegralResult, UgError>,
    out_re: *mut f64,
    out_im: *mut f64,
) -> UgStatus {
    if out_re.is_null() || out_im.is_null() {
        set_error("null output pointer");
        return UgStatus::UgErrInput;
    }
    match result {
        Ok(r) => {
            *out_re = r.value.re;
            *out_im = r.value.im;
            UgStatus::UgOk
        }
        Err(e) => fail(e),
    }
}

/// Integral of det^nu(U) exp(tr(AU + BU*)/2) over Haar-distributed U(N).
///
/// # Safety
/// Matrix handles must be valid; `out_re`/`out_im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ug_eval_i1(
    a: *const UgMatrix,
    b: *const UgMatrix,
    nu: u32,
    out_re: *mut f64,
    out_im: *mut f64,
) -> UgStatus {
    let (a, b) = match (deref(a, "a"), deref(b, "b")) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    write_value(eval_i1(a, b, nu), out_re, out_im)
}

/// Integral of det^nu(UV) exp(tr(UAVB + CV*DU*)/2) over two independent
/// Haar factors on U(N).
///
/// # Safety
/// As `ug_eval_i1`.
#[no_mangle]
pub unsafe extern "C" fn ug_eval_i2(
    a: *const UgMatrix,
    b: *const UgMatrix,
    c: *const UgMatrix,
    d: *const UgMatrix,
    nu: u32,
    out_re: *mut f64,
    out_im: *mut f64,
) -> UgStatus {
    let mats = [deref(a, "a"), deref(b, "b"), deref(c, "c"), deref(d, "d")];
    for m in &mats {
        if let Err(s) = m {
            return *s;
        }
    }
    let [a, b, c, d] = mats.map(|m| m.unwrap());
    write_value(eval_i2(a, b, c, d, nu), out_re, out_im)
}

/// Conjectured rectangular analogue: U over U(N), V over U(M), M < N;
/// a and c are N x M, b and d are M x N.
///
/// # Safety
/// As `ug_eval_i1`.
#[no_mangle]
pub unsafe extern "C" fn ug_eval_i2_rect(
    a: *const UgMatrix,
    b: *const UgMatrix,
    c: *const UgMatrix,
    d: *const UgMatrix,
    out_re: *mut f64,
    out_im: *mut f64,
) -> UgStatus {
    let mats = [deref(a, "a"), deref(b, "b"), deref(c, "c"), deref(d, "d")];
    for m in &mats {
        if let Err(s) = m {
            return *s;
        }
    }
    let [a, b, c, d] = mats.map(|m| m.unwrap());
    write_value(eval_i2_rect(a, b, c, d), out_re, out_im)
}

/// Integral of exp(tr(AUBU*)) over Haar-distributed U(N).
///
/// # Safety
/// As `ug_eval_i1`.
#[no_mangle]
pub unsafe extern "C" fn ug_eval_i3(
    a: *const UgMatrix,
    b: *const UgMatrix,
    out_re: *mut f64,
    out_im: *mut f64,
) -> UgStatus {
    let (a, b) = match (deref(a, "a"), deref(b, "b")) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    write_value(eval_i3(a, b), out_re, out_im)
}
