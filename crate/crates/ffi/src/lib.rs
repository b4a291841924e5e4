//! C ABI over `damped-chain`.
//!
//! Matrices live behind the opaque [`DcMatrix`] handle. Every fallible call
//! returns a [`DcStatus`]; on failure [`dc_last_error_message`] describes the
//! error for the calling thread. Results are written into caller-owned
//! buffers whose lengths are passed alongside the pointers.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use damped_chain::bounds::bound_theorem5;
use damped_chain::chain::damp;
use damped_chain::coupling::ergodicity_coefficient;
use damped_chain::spectral::expansion;
use damped_chain::stationary::{stationary_direct, stationary_series};
use damped_chain::structure::{decompose, Regime};
use damped_chain::triangular::{triangular_limit, LimitTime};
use damped_chain::{ChainError, DampingVector, Distribution, StochasticMatrix};

/// Opaque row-stochastic matrix.
pub struct DcMatrix {
    inner: StochasticMatrix,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    DimensionMismatch = 3,
    Singular = 4,
    NotConverged = 5,
    Unsupported = 6,
    RegimeMismatch = 7,
    Spectral = 8,
    ConditionViolated = 9,
    BufferTooSmall = 10,
    Panic = 99,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DcRegime {
    Regular = 0,
    Singular = 1,
    Unsupported = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(DcStatus, String);

impl From<ChainError> for Failure {
    fn from(e: ChainError) -> Self {
        let status = match &e {
            ChainError::DimensionMismatch { .. } => DcStatus::DimensionMismatch,
            ChainError::Singular(_) => DcStatus::Singular,
            ChainError::NotConverged { .. } => DcStatus::NotConverged,
            ChainError::Unsupported(_) | ChainError::NotClosed { .. } => DcStatus::Unsupported,
            ChainError::RegimeMismatch(_) => DcStatus::RegimeMismatch,
            ChainError::Eigen(_)
            | ChainError::IllConditioned { .. }
            | ChainError::NonSemisimple(_)
            | ChainError::ComplexResidue { .. }
            | ChainError::NearUnitEigenvalue { .. } => DcStatus::Spectral,
            ChainError::ConditionViolated { .. } => DcStatus::ConditionViolated,
            _ => DcStatus::InvalidInput,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            DcStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            DcStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    Failure(DcStatus::NullPointer, format!("{name} is null"))
}

unsafe fn matrix<'a>(m: *const DcMatrix) -> Result<&'a StochasticMatrix, Failure> {
    m.as_ref().map(|m| &m.inner).ok_or_else(|| null("matrix"))
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, need: usize) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(null("output buffer"));
    }
    if len < need {
        return Err(Failure(
            DcStatus::BufferTooSmall,
            format!("output buffer holds {len} values, {need} needed"),
        ));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn check_len(len: usize, dim: usize) -> Result<(), Failure> {
    if len != dim {
        return Err(ChainError::DimensionMismatch {
            expected: dim,
            found: len,
        }
        .into());
    }
    Ok(())
}

unsafe fn damping(d: *const f64, len: usize, dim: usize) -> Result<DampingVector, Failure> {
    check_len(len, dim)?;
    Ok(DampingVector::new(slice(d, len, "damping")?.to_vec())?)
}

unsafe fn distribution(p: *const f64, len: usize, dim: usize) -> Result<Distribution, Failure> {
    check_len(len, dim)?;
    Ok(Distribution::new(slice(p, len, "distribution")?.to_vec())?)
}

/// Creates a matrix from `dim * dim` row-major entries.
///
/// # Safety
/// `data` must point to `dim * dim` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dc_matrix_new(
    data: *const f64,
    dim: usize,
    out: *mut *mut DcMatrix,
) -> DcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let n = dim
            .checked_mul(dim)
            .ok_or_else(|| Failure(DcStatus::InvalidInput, "dimension overflows".into()))?;
        let inner = StochasticMatrix::new(dim, slice(data, n, "data")?.to_vec())?;
        *out = Box::into_raw(Box::new(DcMatrix { inner }));
        Ok(())
    })
}

/// Releases a matrix. Null is ignored.
///
/// # Safety
/// `m` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dc_matrix_free(m: *mut DcMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of states, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dc_matrix_dim(m: *const DcMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.dim())
}

/// Copies the entries row-major into `out`, which holds `len >= dim * dim` doubles.
///
/// # Safety
/// `m` must be a live handle and `out` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn dc_matrix_entries(
    m: *const DcMatrix,
    out: *mut f64,
    len: usize,
) -> DcStatus {
    guard(|| {
        let p = matrix(m)?;
        let src = p.as_slice();
        out_slice(out, len, src.len())?[..src.len()].copy_from_slice(src);
        Ok(())
    })
}

/// Builds P_ε = (1 − ε)P₀ + εD for the damping vector `d` of length `len`.
///
/// # Safety
/// `p0` must be a live handle, `d` must hold `len` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dc_damped_matrix(
    p0: *const DcMatrix,
    d: *const f64,
    len: usize,
    epsilon: f64,
    out: *mut *mut DcMatrix,
) -> DcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p0 = matrix(p0)?;
        let d = damping(d, len, p0.dim())?;
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(ChainError::InvalidEpsilon(epsilon).into());
        }
        *out = Box::into_raw(Box::new(DcMatrix {
            inner: damp(p0, &d, epsilon),
        }));
        Ok(())
    })
}

/// Stationary law of `p` by a direct linear solve.
///
/// # Safety
/// `p` must be a live handle and `out` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn dc_stationary_direct(
    p: *const DcMatrix,
    out: *mut f64,
    len: usize,
) -> DcStatus {
    guard(|| {
        let p = matrix(p)?;
        let sol = stationary_direct(p)?;
        out_slice(out, len, p.dim())?[..p.dim()].copy_from_slice(sol.pi.probs());
        Ok(())
    })
}

/// Stationary law of P_ε by the geometric series; `terms` (may be null) receives L.
///
/// # Safety
/// `p0` must be a live handle, `d` must hold `len` doubles, `out` must hold
/// `len` writable doubles and `terms` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn dc_stationary_series(
    p0: *const DcMatrix,
    d: *const f64,
    len: usize,
    epsilon: f64,
    tol: f64,
    out: *mut f64,
    terms: *mut usize,
) -> DcStatus {
    guard(|| {
        let p0 = matrix(p0)?;
        let d = damping(d, len, p0.dim())?;
        let sol = stationary_series(p0, &d, epsilon, tol)?;
        out_slice(out, len, p0.dim())?[..p0.dim()].copy_from_slice(sol.pi.probs());
        if !terms.is_null() {
            *terms = sol.iterations_or_terms;
        }
        Ok(())
    })
}

/// Classifies P₀ as regular, singular or unsupported.
///
/// # Safety
/// `p0` must be a live handle and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dc_structure_regime(p0: *const DcMatrix, out: *mut DcRegime) -> DcStatus {
    guard(|| {
        let p0 = matrix(p0)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = match decompose(p0).regime {
            Regime::Regular => DcRegime::Regular,
            Regime::Singular => DcRegime::Singular,
            Regime::Unsupported => DcRegime::Unsupported,
        };
        Ok(())
    })
}

/// Expansion of π_ε up to `order`. Row k of `out` (m values each) holds the
/// coefficient of εᵏ, row 0 being the limit π₀; `out_len >= (order + 1) * m`.
///
/// # Safety
/// `p0` must be a live handle, `d` must hold `len` doubles and `out` must
/// hold `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn dc_expansion(
    p0: *const DcMatrix,
    d: *const f64,
    len: usize,
    order: usize,
    out: *mut f64,
    out_len: usize,
) -> DcStatus {
    guard(|| {
        let p0 = matrix(p0)?;
        let m = p0.dim();
        let d = damping(d, len, m)?;
        let need = (order + 1)
            .checked_mul(m)
            .ok_or_else(|| Failure(DcStatus::InvalidInput, "order overflows".into()))?;
        let out = out_slice(out, out_len, need)?;
        let series = expansion(p0, &d, &decompose(p0), order)?;
        out[..m].copy_from_slice(&series.base);
        for (k, c) in series.coeffs.iter().enumerate() {
            out[(k + 1) * m..(k + 2) * m].copy_from_slice(c);
        }
        Ok(())
    })
}

/// Δ_N(P) = (1 − Q(Pᴺ))^{1/N}.
///
/// # Safety
/// `p` must be a live handle and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dc_ergodicity_coefficient(
    p: *const DcMatrix,
    n: usize,
    out: *mut f64,
) -> DcStatus {
    guard(|| {
        let p = matrix(p)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ergodicity_coefficient(p, n)?.delta_n;
        Ok(())
    })
}

/// Geometric bound on max_j |p_ε,p̄,j(n) − π_ε,j| through 1 − Q(P₀).
///
/// # Safety
/// `p0` must be a live handle, `d` and `p` must hold `len` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dc_bound_theorem5(
    p0: *const DcMatrix,
    d: *const f64,
    p: *const f64,
    len: usize,
    epsilon: f64,
    n: usize,
    out: *mut f64,
) -> DcStatus {
    guard(|| {
        let p0 = matrix(p0)?;
        let d = damping(d, len, p0.dim())?;
        let p = distribution(p, len, p0.dim())?;
        if out.is_null() {
            return Err(null("out"));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(ChainError::InvalidEpsilon(epsilon).into());
        }
        let pi = stationary_direct(&damp(p0, &d, epsilon))?.pi;
        *out = bound_theorem5(p0, &p, &pi, epsilon, n)?;
        Ok(())
    })
}

/// Mixture limit π(t) = e^{−t}π₀,p̄ + (1 − e^{−t})π₀,d̄; `t` may be +∞.
///
/// # Safety
/// `p0` must be a live handle, `d` and `p` must hold `len` doubles and `out`
/// must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn dc_triangular_limit(
    p0: *const DcMatrix,
    d: *const f64,
    p: *const f64,
    len: usize,
    t: f64,
    out: *mut f64,
) -> DcStatus {
    guard(|| {
        let p0 = matrix(p0)?;
        let d = damping(d, len, p0.dim())?;
        let p = distribution(p, len, p0.dim())?;
        let out = out_slice(out, len, p0.dim())?;
        let time = if t == f64::INFINITY {
            LimitTime::Infinite
        } else if t >= 0.0 {
            LimitTime::Finite(t)
        } else {
            return Err(Failure(
                DcStatus::InvalidInput,
                format!("time {t} must be non-negative"),
            ));
        };
        let limit = triangular_limit(p0, &d, &p, &decompose(p0), time)?;
        out[..p0.dim()].copy_from_slice(&limit.pi_of_t);
        Ok(())
    })
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn dc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

static VERSION: &CStr =
    match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };

#[no_mangle]
pub extern "C" fn dc_version() -> *const c_char {
    VERSION.as_ptr()
}

#[cfg(test)]
mod tests {
    use std::ptr;

    use super::*;

    #[test]
    fn null_handles_are_reported() {
        let mut out = 0.0;
        let s = unsafe { dc_ergodicity_coefficient(ptr::null(), 1, &mut out) };
        assert_eq!(s, DcStatus::NullPointer);
        let msg = unsafe { CStr::from_ptr(dc_last_error_message()) };
        assert_eq!(msg.to_str().unwrap(), "matrix is null");
        assert_eq!(unsafe { dc_matrix_dim(ptr::null()) }, 0);
        unsafe { dc_matrix_free(ptr::null_mut()) };
    }

    #[test]
    fn version_matches_package() {
        let v = unsafe { CStr::from_ptr(dc_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
