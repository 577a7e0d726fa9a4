//! C interface to `tdesign`.
//!
//! Designs are opaque `TdDesign` handles owned by the caller and released
//! with `td_design_free`. Every fallible function returns a `TdStatus`; on
//! failure `td_last_error` describes the most recent error on the calling
//! thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tdesign::chebdesign::xi_m_beta;
use tdesign::design::{BSet, Design, DesignInterval, Prior, ReducedParameter};
use tdesign::error::Error;
use tdesign::models::{LinearModelPair, MichaelisMentenEmax};
use tdesign::optimizer::{optimize_local_linear, optimize_local_nonlinear, OptimizerConfig};
use tdesign::robust::{optimize_bayes, optimize_maximin};
use tdesign::tcrit::{t_efficiency_linear, t_efficiency_nonlinear};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TdStatus {
    Ok = 0,
    InvalidArgument = 1,
    Validation = 2,
    Convergence = 3,
    NullPointer = 4,
    Panic = 5,
}

/// A design together with its design interval.
pub struct TdDesign {
    design: Design,
    interval: DesignInterval,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            TdStatus::Ok
        }
        Ok(Err(Failure::Null(name))) => {
            set_error(format!("{name} is null"));
            TdStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            match e {
                Error::InvalidArgument(_) => TdStatus::InvalidArgument,
                e if e.exit_code() == 3 => TdStatus::Convergence,
                _ => TdStatus::Validation,
            }
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            TdStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &'static str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn design_ref<'a>(d: *const TdDesign) -> Result<&'a TdDesign, Failure> {
    d.as_ref().ok_or(Failure::Null("design"))
}

unsafe fn store(out: *mut *mut TdDesign, design: Design, interval: DesignInterval) {
    *out = Box::into_raw(Box::new(TdDesign { design, interval }));
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn td_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates a validated design on `[lower, upper]` from `len` points and weights.
///
/// # Safety
/// `support` and `weights` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn td_design_new(
    support: *const f64,
    weights: *const f64,
    len: usize,
    lower: f64,
    upper: f64,
    out: *mut *mut TdDesign,
) -> TdStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let interval = DesignInterval::new(lower, upper)?;
        let design = Design::new(slice(support, len, "support")?.to_vec(), slice(weights, len, "weights")?.to_vec())?;
        design.validate(&interval)?;
        store(out, design, interval);
        Ok(())
    })
}

/// Parses a design from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn td_design_from_json(json: *const c_char, out: *mut *mut TdDesign) -> TdStatus {
    guard(|| {
        if json.is_null() {
            return Err(Failure::Null("json"));
        }
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Error::Parse(e.to_string()))?;
        let (design, interval) = Design::from_json(text)?;
        store(out, design, interval);
        Ok(())
    })
}

/// JSON form of the design; release with `td_string_free`. Null on a null handle.
///
/// # Safety
/// `design` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn td_design_to_json(design: *const TdDesign) -> *mut c_char {
    let mut text = None;
    let status = guard(|| {
        let d = design_ref(design)?;
        text = Some(d.design.to_json(&d.interval));
        Ok(())
    });
    match (status, text) {
        (TdStatus::Ok, Some(t)) => CString::new(t).map_or(ptr::null_mut(), CString::into_raw),
        _ => ptr::null_mut(),
    }
}

/// # Safety
/// `s` must be null or a string returned by this library, freed only once.
#[no_mangle]
pub unsafe extern "C" fn td_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `design` must be null or a live handle, freed only once.
#[no_mangle]
pub unsafe extern "C" fn td_design_free(design: *mut TdDesign) {
    if !design.is_null() {
        drop(Box::from_raw(design));
    }
}

/// Number of support points; 0 for a null handle.
///
/// # Safety
/// `design` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn td_design_len(design: *const TdDesign) -> usize {
    design.as_ref().map_or(0, |d| d.design.len())
}

/// Copies support points and weights into buffers of at least
/// `td_design_len` doubles. Either buffer may be null.
///
/// # Safety
/// Non-null buffers must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn td_design_copy(
    design: *const TdDesign,
    support: *mut f64,
    weights: *mut f64,
    capacity: usize,
) -> TdStatus {
    guard(|| {
        let d = design_ref(design)?;
        let n = d.design.len();
        if capacity < n {
            return Err(Error::InvalidArgument(format!("capacity {capacity} is below {n}")).into());
        }
        if !support.is_null() {
            ptr::copy_nonoverlapping(d.design.support().as_ptr(), support, n);
        }
        if !weights.is_null() {
            ptr::copy_nonoverlapping(d.design.weights().as_ptr(), weights, n);
        }
        Ok(())
    })
}

/// The design `ξ_{m,β}` on `[-r, r]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn td_xi_m_beta(m: usize, beta: f64, r: f64, out: *mut *mut TdDesign) -> TdStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let x = xi_m_beta(m, beta, r)?;
        store(out, x.design, DesignInterval::symmetric(r)?);
        Ok(())
    })
}

fn polynomial(m1: usize, m2: usize, lower: f64, upper: f64) -> Result<(LinearModelPair, DesignInterval), Failure> {
    let interval = DesignInterval::new(lower, upper)?;
    Ok((LinearModelPair::polynomial(m1, m2, &interval)?, interval))
}

/// Locally optimal design for polynomials of degrees `m1 < m2` on
/// `[lower, upper]` at the reduced parameter `b` of length `m2 - m1 - 1`.
/// `value` may be null.
///
/// # Safety
/// `b` must point to `b_len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn td_local_polynomial(
    m1: usize,
    m2: usize,
    lower: f64,
    upper: f64,
    b: *const f64,
    b_len: usize,
    out: *mut *mut TdDesign,
    value: *mut f64,
) -> TdStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let (pair, interval) = polynomial(m1, m2, lower, upper)?;
        let b = ReducedParameter::new(slice(b, b_len, "b")?.to_vec())?;
        let res = optimize_local_linear(&pair, &b, &interval, &OptimizerConfig::default())?;
        if !value.is_null() {
            *value = res.value;
        }
        store(out, res.design, interval);
        Ok(())
    })
}

/// Locally optimal design discriminating Michaelis–Menten from EMAX with
/// fixed `theta2 = (θ₂₀, θ₂₁, θ₂₂)` on `[lower, upper]`.
///
/// # Safety
/// `theta2` must point to three doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn td_local_michaelis_menten(
    theta2: *const f64,
    lower: f64,
    upper: f64,
    out: *mut *mut TdDesign,
    value: *mut f64,
) -> TdStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let t = slice(theta2, 3, "theta2")?;
        let pair = MichaelisMentenEmax::new([t[0], t[1], t[2]], DesignInterval::new(lower, upper)?)?;
        let res = optimize_local_nonlinear(&pair, &OptimizerConfig::default())?;
        if !value.is_null() {
            *value = res.value;
        }
        store(out, res.design, *pair.interval());
        Ok(())
    })
}

/// Bayesian design under the discrete prior with `atoms` parameters, each a
/// row of `m2 - m1 - 1` values in `b`, and masses `masses`.
///
/// # Safety
/// `b` must hold `atoms * (m2 - m1 - 1)` doubles and `masses` must hold
/// `atoms`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn td_bayes_polynomial(
    m1: usize,
    m2: usize,
    lower: f64,
    upper: f64,
    b: *const f64,
    masses: *const f64,
    atoms: usize,
    out: *mut *mut TdDesign,
) -> TdStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let (pair, interval) = polynomial(m1, m2, lower, upper)?;
        let dim = pair.s() - 1;
        let values = slice(b, atoms * dim, "b")?;
        let masses = slice(masses, atoms, "masses")?;
        let list = values
            .chunks(dim)
            .zip(masses)
            .map(|(v, &m)| Ok((ReducedParameter::new(v.to_vec())?, m)))
            .collect::<Result<Vec<_>, Error>>()?;
        let prior = Prior::new(list)?;
        let design = optimize_bayes(&pair, &prior, &interval, &OptimizerConfig::default())?;
        store(out, design, interval);
        Ok(())
    })
}

/// Standardized maximin design over `ℬ = [-d, d]` (`d` may be infinite)
/// for polynomials with `m2 = m1 + 2`.
///
/// # Safety
/// `out` must be writable; `value` may be null.
#[no_mangle]
pub unsafe extern "C" fn td_maximin_polynomial(
    m1: usize,
    m2: usize,
    lower: f64,
    upper: f64,
    d: f64,
    out: *mut *mut TdDesign,
    value: *mut f64,
) -> TdStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let (pair, interval) = polynomial(m1, m2, lower, upper)?;
        let cert = optimize_maximin(&pair, &BSet::interval(d)?, &interval, &OptimizerConfig::default())?;
        if !value.is_null() {
            *value = cert.value;
        }
        store(out, cert.design, interval);
        Ok(())
    })
}

/// T-efficiency of `design` for the polynomial pair at `b`.
///
/// # Safety
/// `design` must be a live handle, `b` must hold `b_len` doubles and
/// `efficiency` must be writable.
#[no_mangle]
pub unsafe extern "C" fn td_efficiency_polynomial(
    design: *const TdDesign,
    m1: usize,
    m2: usize,
    b: *const f64,
    b_len: usize,
    efficiency: *mut f64,
) -> TdStatus {
    guard(|| {
        let d = design_ref(design)?;
        if efficiency.is_null() {
            return Err(Failure::Null("efficiency"));
        }
        let pair = LinearModelPair::polynomial(m1, m2, &d.interval)?;
        let b = ReducedParameter::new(slice(b, b_len, "b")?.to_vec())?;
        *efficiency = t_efficiency_linear(&d.design, &pair, &b, &d.interval)?;
        Ok(())
    })
}

/// T-efficiency of `design` for Michaelis–Menten against EMAX at `theta2`.
///
/// # Safety
/// `design` must be a live handle, `theta2` must hold three doubles and
/// `efficiency` must be writable.
#[no_mangle]
pub unsafe extern "C" fn td_efficiency_michaelis_menten(
    design: *const TdDesign,
    theta2: *const f64,
    efficiency: *mut f64,
) -> TdStatus {
    guard(|| {
        let d = design_ref(design)?;
        if efficiency.is_null() {
            return Err(Failure::Null("efficiency"));
        }
        let t = slice(theta2, 3, "theta2")?;
        let pair = MichaelisMentenEmax::new([t[0], t[1], t[2]], d.interval)?;
        *efficiency = t_efficiency_nonlinear(&d.design, &pair)?;
        Ok(())
    })
}
