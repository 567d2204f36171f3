//! C ABI over the core library: opaque handles for models and series,
//! integer status codes, row-major `double` buffers for matrices, and a
//! thread-local last-error message. The header is generated at build time
//! into `include/magnus.h`.
//!
//! Conventions: every pointer argument must be valid or null (null yields
//! `InvalidArgument`), matrix buffers hold `dim*dim` entries row-major, and
//! strings returned as `*mut c_char` are owned by the caller and released
//! with `mg_string_free`. Panics are caught and reported as `MG_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use num_complex::Complex64;

use magnus_core::diagnostics::{
    certify, divergence_onset, kappa_sweep, real_log_exists, RealLogVerdict, Verdict,
};
use magnus_core::magnus::{kappa_scaled, magnus_terms, partial_sum, MagnusSeries};
use magnus_core::ode::{action_norm, corpus, solve_at, MatrixFunction};
use magnus_core::polymat::{format_model, parse_model};

/// Opaque handle to a coefficient-matrix model A(t).
pub struct MgModel {
    inner: MatrixFunction,
}

/// Opaque handle to a generated series Ω₁..Ω_N.
pub struct MgSeries {
    inner: MagnusSeries,
}

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgStatus {
    MgStatusOk = 0,
    MgStatusInvalidArgument = 1,
    MgStatusParseError = 2,
    MgStatusNumericError = 3,
    MgStatusPanic = 4,
}

/// Result of a unit-circle sweep.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MgSweepHit {
    pub found: bool,
    pub alpha: f64,
    pub t_star: f64,
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub winding: i64,
    pub defective: bool,
}

/// Verdict codes for `mg_real_log_verdict`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MgRealLogVerdict {
    MgRealLogYes = 0,
    MgRealLogNo = 1,
    MgRealLogPrincipalBranchInapplicable = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl std::fmt::Display) {
    let text = CString::new(message.to_string()).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = text);
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mg_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

fn guard(body: impl FnOnce() -> MgStatus + std::panic::UnwindSafe) -> MgStatus {
    match catch_unwind(body) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            MgStatus::MgStatusPanic
        }
    }
}

unsafe fn model_ref<'a>(ptr: *const MgModel) -> Option<&'a MatrixFunction> {
    ptr.as_ref().map(|m| &m.inner)
}

unsafe fn series_ref<'a>(ptr: *const MgSeries) -> Option<&'a MagnusSeries> {
    ptr.as_ref().map(|s| &s.inner)
}

unsafe fn cstr<'a>(ptr: *const c_char) -> Option<&'a str> {
    if ptr.is_null() {
        return None;
    }
    CStr::from_ptr(ptr).to_str().ok()
}

fn boxed_model(inner: MatrixFunction) -> *mut MgModel {
    Box::into_raw(Box::new(MgModel { inner }))
}

/// Parse a model from its textual format. Returns null on failure (see
/// `mg_last_error`).
///
/// # Safety
/// `text` must be a valid NUL-terminated string or null.
#[no_mangle]
pub unsafe extern "C" fn mg_model_from_text(text: *const c_char) -> *mut MgModel {
    let Some(text) = cstr(text) else {
        set_error("null or non-UTF-8 text");
        return std::ptr::null_mut();
    };
    match catch_unwind(|| parse_model(text)) {
        Ok(Ok(model)) => boxed_model(MatrixFunction::from_piecewise("model", model)),
        Ok(Err(e)) => {
            set_error(e);
            std::ptr::null_mut()
        }
        Err(_) => {
            set_error("internal panic");
            std::ptr::null_mut()
        }
    }
}

/// Load a model file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string or null.
#[no_mangle]
pub unsafe extern "C" fn mg_model_from_file(path: *const c_char) -> *mut MgModel {
    let Some(path) = cstr(path) else {
        set_error("null or non-UTF-8 path");
        return std::ptr::null_mut();
    };
    let text = match std::fs::read_to_string(PathBuf::from(path)) {
        Ok(text) => text,
        Err(e) => {
            set_error(format!("{path}: {e}"));
            return std::ptr::null_mut();
        }
    };
    match parse_model(&text) {
        Ok(model) => boxed_model(MatrixFunction::from_piecewise("model", model)),
        Err(e) => {
            set_error(format!("{path}: {e}"));
            std::ptr::null_mut()
        }
    }
}

/// Instantiate a built-in example by name (ex1, ex2, ex3, ex4).
///
/// # Safety
/// `name` must be a valid NUL-terminated string or null.
#[no_mangle]
pub unsafe extern "C" fn mg_model_builtin(name: *const c_char) -> *mut MgModel {
    let Some(name) = cstr(name) else {
        set_error("null or non-UTF-8 name");
        return std::ptr::null_mut();
    };
    match corpus::builtin(name) {
        Some(model) => boxed_model(model),
        None => {
            set_error(format!("unknown built-in {name:?}"));
            std::ptr::null_mut()
        }
    }
}

/// # Safety
/// `model` must come from a `mg_model_*` constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mg_model_free(model: *mut MgModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn mg_model_dim(model: *const MgModel) -> u32 {
    model_ref(model).map(|m| m.dim() as u32).unwrap_or(0)
}

/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn mg_model_domain_end(model: *const MgModel) -> f64 {
    model_ref(model).map(|m| m.domain_end()).unwrap_or(f64::NAN)
}

/// Canonical textual form of an exact model; null for numeric-only models.
/// Free with `mg_string_free`.
///
/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn mg_model_to_text(model: *const MgModel) -> *mut c_char {
    let Some(model) = model_ref(model) else {
        set_error("null model");
        return std::ptr::null_mut();
    };
    match model.piecewise() {
        Some(p) => CString::new(format_model(p)).map(CString::into_raw).unwrap_or_else(|_| {
            set_error("interior NUL");
            std::ptr::null_mut()
        }),
        None => {
            set_error("model is numeric-only; no exact textual form");
            std::ptr::null_mut()
        }
    }
}

/// # Safety
/// `s` must be a string returned by this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn mg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Generate the first `order` exact series terms of the model.
///
/// # Safety
/// `model` must be a live handle or null; `out` must point to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn mg_series_compute(
    model: *const MgModel,
    order: u32,
    out: *mut *mut MgSeries,
) -> MgStatus {
    let (Some(model), Some(out)) = (model_ref(model), out.as_mut()) else {
        set_error("null argument");
        return MgStatus::MgStatusInvalidArgument;
    };
    guard(AssertUnwindSafe(|| {
        let Some(piecewise) = model.piecewise() else {
            set_error("model is numeric-only; exact series terms are unavailable");
            return MgStatus::MgStatusInvalidArgument;
        };
        match magnus_terms(piecewise, order as usize) {
            Ok(series) => {
                *out = Box::into_raw(Box::new(MgSeries { inner: series }));
                MgStatus::MgStatusOk
            }
            Err(e) => {
                set_error(e);
                MgStatus::MgStatusNumericError
            }
        }
    }))
}

/// # Safety
/// `series` must come from `mg_series_compute` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mg_series_free(series: *mut MgSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// # Safety
/// `series` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn mg_series_order(series: *const MgSeries) -> u32 {
    series_ref(series).map(|s| s.order() as u32).unwrap_or(0)
}

/// # Safety
/// `series` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn mg_series_dim(series: *const MgSeries) -> u32 {
    series_ref(series).map(|s| s.dim() as u32).unwrap_or(0)
}

/// Textual form of term n (1-based). Free with `mg_string_free`.
///
/// # Safety
/// `series` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn mg_series_term_text(series: *const MgSeries, n: u32) -> *mut c_char {
    let Some(series) = series_ref(series) else {
        set_error("null series");
        return std::ptr::null_mut();
    };
    match series.term(n as usize) {
        Ok(term) => CString::new(format_model(term)).map(CString::into_raw).unwrap_or_else(
            |_| {
                set_error("interior NUL");
                std::ptr::null_mut()
            },
        ),
        Err(e) => {
            set_error(e);
            std::ptr::null_mut()
        }
    }
}

/// Σ_{k≤n} Ω_k(t) into a row-major dim×dim buffer.
///
/// # Safety
/// `series` must be a live handle or null; `out_rowmajor` must hold dim²
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn mg_series_partial_sum(
    series: *const MgSeries,
    n: u32,
    t: f64,
    out_rowmajor: *mut f64,
) -> MgStatus {
    let Some(series) = series_ref(series) else {
        set_error("null series");
        return MgStatus::MgStatusInvalidArgument;
    };
    if out_rowmajor.is_null() {
        set_error("null output buffer");
        return MgStatus::MgStatusInvalidArgument;
    }
    guard(AssertUnwindSafe(|| match partial_sum(series, n as usize, t) {
        Ok(sum) => {
            let dim = series.dim();
            let out = std::slice::from_raw_parts_mut(out_rowmajor, dim * dim);
            out.copy_from_slice(sum.data());
            MgStatus::MgStatusOk
        }
        Err(e) => {
            set_error(e);
            MgStatus::MgStatusInvalidArgument
        }
    }))
}

/// Σ_{k≤n} κᵏ Ω_k(t) into separate real/imaginary row-major buffers.
///
/// # Safety
/// `series` must be a live handle or null; both buffers must hold dim²
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn mg_series_kappa_sum(
    series: *const MgSeries,
    kappa_re: f64,
    kappa_im: f64,
    n: u32,
    t: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> MgStatus {
    let Some(series) = series_ref(series) else {
        set_error("null series");
        return MgStatus::MgStatusInvalidArgument;
    };
    if out_re.is_null() || out_im.is_null() {
        set_error("null output buffer");
        return MgStatus::MgStatusInvalidArgument;
    }
    guard(AssertUnwindSafe(|| {
        match kappa_scaled(series, Complex64::new(kappa_re, kappa_im), n as usize, t) {
            Ok(sum) => {
                let dim = series.dim();
                let re = std::slice::from_raw_parts_mut(out_re, dim * dim);
                let im = std::slice::from_raw_parts_mut(out_im, dim * dim);
                for (k, z) in sum.data().iter().enumerate() {
                    re[k] = z.re;
                    im[k] = z.im;
                }
                MgStatus::MgStatusOk
            }
            Err(e) => {
                set_error(e);
                MgStatus::MgStatusInvalidArgument
            }
        }
    }))
}

/// ‖Ωₙ(t)‖₂.
///
/// # Safety
/// `series` must be a live handle or null; `out_norm` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_series_term_norm(
    series: *const MgSeries,
    n: u32,
    t: f64,
    out_norm: *mut f64,
) -> MgStatus {
    let (Some(series), Some(out)) = (series_ref(series), out_norm.as_mut()) else {
        set_error("null argument");
        return MgStatus::MgStatusInvalidArgument;
    };
    guard(AssertUnwindSafe(|| {
        let term = match series.term(n as usize) {
            Ok(term) => term,
            Err(e) => {
                set_error(e);
                return MgStatus::MgStatusInvalidArgument;
            }
        };
        match term.evaluate(t) {
            Ok(value) => {
                *out = magnus_core::linalg::spectral_norm(&value.to_complex());
                MgStatus::MgStatusOk
            }
            Err(e) => {
                set_error(e);
                MgStatus::MgStatusInvalidArgument
            }
        }
    }))
}

/// Empirical divergence onset over (0, t_max]: `*out_found` reports whether
/// the estimated κ-radius drops below 1, and `*out_t` holds the crossing.
///
/// # Safety
/// `series` must be a live handle or null; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_series_divergence_onset(
    series: *const MgSeries,
    t_max: f64,
    out_t: *mut f64,
    out_found: *mut bool,
) -> MgStatus {
    let (Some(series), Some(out_t), Some(out_found)) =
        (series_ref(series), out_t.as_mut(), out_found.as_mut())
    else {
        set_error("null argument");
        return MgStatus::MgStatusInvalidArgument;
    };
    guard(AssertUnwindSafe(|| match divergence_onset(series, t_max) {
        Ok(Some(t)) => {
            *out_t = t;
            *out_found = true;
            MgStatus::MgStatusOk
        }
        Ok(None) => {
            *out_t = f64::NAN;
            *out_found = false;
            MgStatus::MgStatusOk
        }
        Err(e) => {
            set_error(e);
            MgStatus::MgStatusNumericError
        }
    }))
}

/// γ(t) = ∫₀ᵗ ‖A(τ)‖₂ dτ.
///
/// # Safety
/// `model` must be a live handle or null; `out_gamma` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_action_norm(
    model: *const MgModel,
    t: f64,
    tol: f64,
    out_gamma: *mut f64,
) -> MgStatus {
    let (Some(model), Some(out)) = (model_ref(model), out_gamma.as_mut()) else {
        set_error("null argument");
        return MgStatus::MgStatusInvalidArgument;
    };
    guard(AssertUnwindSafe(|| match action_norm(model, t, tol) {
        Ok(gamma) => {
            *out = gamma;
            MgStatus::MgStatusOk
        }
        Err(e) => {
            set_error(e);
            MgStatus::MgStatusNumericError
        }
    }))
}

/// Convergence certificate: γ(t) and whether convergence is guaranteed
/// (γ < π − margin).
///
/// # Safety
/// `model` must be a live handle or null; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_certify(
    model: *const MgModel,
    t: f64,
    out_gamma: *mut f64,
    out_guaranteed: *mut bool,
) -> MgStatus {
    let (Some(model), Some(out_gamma), Some(out_guaranteed)) =
        (model_ref(model), out_gamma.as_mut(), out_guaranteed.as_mut())
    else {
        set_error("null argument");
        return MgStatus::MgStatusInvalidArgument;
    };
    guard(AssertUnwindSafe(|| match certify(model, t) {
        Ok(cert) => {
            *out_gamma = cert.gamma;
            *out_guaranteed = cert.verdict == Verdict::GuaranteedConvergent;
            MgStatus::MgStatusOk
        }
        Err(e) => {
            set_error(e);
            MgStatus::MgStatusNumericError
        }
    }))
}

/// Fundamental solution Y(t;κ) into real/imaginary row-major buffers.
///
/// # Safety
/// `model` must be a live handle or null; both buffers must hold dim²
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn mg_solve(
    model: *const MgModel,
    kappa_re: f64,
    kappa_im: f64,
    t: f64,
    tol: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> MgStatus {
    let Some(model) = model_ref(model) else {
        set_error("null model");
        return MgStatus::MgStatusInvalidArgument;
    };
    if out_re.is_null() || out_im.is_null() {
        set_error("null output buffer");
        return MgStatus::MgStatusInvalidArgument;
    }
    guard(AssertUnwindSafe(|| {
        match solve_at(model, Complex64::new(kappa_re, kappa_im), &[t], tol) {
            Ok(mut values) => {
                let y = values.pop().expect("one output time");
                let dim = model.dim();
                let re = std::slice::from_raw_parts_mut(out_re, dim * dim);
                let im = std::slice::from_raw_parts_mut(out_im, dim * dim);
                for (k, z) in y.data().iter().enumerate() {
                    re[k] = z.re;
                    im[k] = z.im;
                }
                MgStatus::MgStatusOk
            }
            Err(e) => {
                set_error(e);
                MgStatus::MgStatusNumericError
            }
        }
    }))
}

/// Real-logarithm verdict for Y(t;1).
///
/// # Safety
/// `model` must be a live handle or null; `out_verdict` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_real_log_verdict(
    model: *const MgModel,
    t: f64,
    out_verdict: *mut MgRealLogVerdict,
) -> MgStatus {
    let (Some(model), Some(out)) = (model_ref(model), out_verdict.as_mut()) else {
        set_error("null argument");
        return MgStatus::MgStatusInvalidArgument;
    };
    guard(AssertUnwindSafe(|| {
        let y = match solve_at(model, Complex64::new(1.0, 0.0), &[t], 1e-10) {
            Ok(mut values) => values.pop().expect("one output time"),
            Err(e) => {
                set_error(e);
                return MgStatus::MgStatusNumericError;
            }
        };
        match real_log_exists(&y) {
            Ok(report) => {
                *out = match report.verdict {
                    RealLogVerdict::Yes => MgRealLogVerdict::MgRealLogYes,
                    RealLogVerdict::No => MgRealLogVerdict::MgRealLogNo,
                    RealLogVerdict::PrincipalBranchInapplicable => {
                        MgRealLogVerdict::MgRealLogPrincipalBranchInapplicable
                    }
                };
                MgStatus::MgStatusOk
            }
            Err(e) => {
                set_error(e);
                MgStatus::MgStatusNumericError
            }
        }
    }))
}

/// Sweep κ over the unit circle and report the earliest defective,
/// origin-encircling collision below t_max, if any.
///
/// # Safety
/// `model` must be a live handle or null; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mg_sweep(
    model: *const MgModel,
    t_max: f64,
    alpha_samples: u32,
    out: *mut MgSweepHit,
) -> MgStatus {
    let (Some(model), Some(out)) = (model_ref(model), out.as_mut()) else {
        set_error("null argument");
        return MgStatus::MgStatusInvalidArgument;
    };
    guard(AssertUnwindSafe(|| match kappa_sweep(model, t_max, alpha_samples as usize) {
        Ok(result) => {
            *out = match result.earliest {
                Some(hit) => MgSweepHit {
                    found: true,
                    alpha: hit.alpha,
                    t_star: hit.event.t_star,
                    lambda_re: hit.event.lambda_star.re,
                    lambda_im: hit.event.lambda_star.im,
                    winding: hit.event.winding,
                    defective: hit.event.defective,
                },
                None => MgSweepHit {
                    found: false,
                    alpha: f64::NAN,
                    t_star: f64::NAN,
                    lambda_re: f64::NAN,
                    lambda_im: f64::NAN,
                    winding: 0,
                    defective: false,
                },
            };
            MgStatus::MgStatusOk
        }
        Err(e) => {
            set_error(e);
            MgStatus::MgStatusNumericError
        }
    }))
}
