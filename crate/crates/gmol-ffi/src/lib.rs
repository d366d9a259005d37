//! C ABI over the gmol library.
//!
//! Conventions: every function returns a `GmolStatus` code and writes its
//! results through out-pointers. Fits are returned as opaque handles that
//! must be released with `gmol_fit_free`.
//!
//! # Safety
//!
//! Every entry point is `unsafe` in the Rust sense with the usual C
//! contract: pointers must be null or valid for the stated access, buffers
//! must be at least as long as stated, and fit handles must come from
//! `gmol_fit_mle` and not be used after `gmol_fit_free`. Null pointers are
//! detected and reported as `InvalidArgument`; panics are caught at the
//! boundary and reported as `Panic`.

use gmol::fit::{fit_mle_with, FitOptions, IidSample};
use gmol::{gof_stats, Error, GmolParams, OptimizerConfig, SubModel};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmolStatus {
    Ok = 0,
    /// An argument is outside its mathematical domain.
    DomainError = 1,
    /// A series or iteration failed to reach its tolerance.
    AccuracyError = 2,
    /// The optimizer failed or the fit is unusable.
    NonConvergence = 3,
    /// A dataset violates its structural requirements.
    DesignError = 4,
    /// A null pointer or malformed buffer was passed.
    InvalidArgument = 5,
    /// A result is not representable (overflow/underflow).
    RangeError = 6,
    /// An internal panic was caught at the boundary.
    Panic = 7,
}

fn status_of(e: &Error) -> GmolStatus {
    match e {
        Error::Domain(_) | Error::MomentUndefined { .. } => GmolStatus::DomainError,
        Error::Accuracy(_) => GmolStatus::AccuracyError,
        Error::NonConvergence(_) | Error::Initialization(_) | Error::Inconsistent(_) => {
            GmolStatus::NonConvergence
        }
        Error::Design(_) | Error::Calibration(_) | Error::Degenerate(_) => GmolStatus::DesignError,
        Error::Range(_) => GmolStatus::RangeError,
        Error::Evaluation(_) => GmolStatus::RangeError,
    }
}

/// Plain-struct parameter vector (alpha, lambda, tau, beta).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GmolParamsC {
    pub alpha: f64,
    pub lambda: f64,
    pub tau: f64,
    pub beta: f64,
}

/// Model selector for fitting.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmolModel {
    Gmol = 0,
    Mol = 1,
    Lomax = 2,
}

impl From<GmolModel> for SubModel {
    fn from(m: GmolModel) -> SubModel {
        match m {
            GmolModel::Gmol => SubModel::Gmol,
            GmolModel::Mol => SubModel::Mol,
            GmolModel::Lomax => SubModel::Lomax,
        }
    }
}

/// Goodness-of-fit report (flat struct of the eight statistics).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GmolGof {
    pub w_star: f64,
    pub a_star: f64,
    pub ks: f64,
    pub ks_p: f64,
    pub aic: f64,
    pub caic: f64,
    pub bic: f64,
    pub hqic: f64,
}

/// Opaque handle to a fitted model.
pub struct GmolFit {
    inner: gmol::FitResult,
    data: Vec<f64>,
}

fn to_params(c: &GmolParamsC) -> Result<GmolParams, Error> {
    GmolParams::new(c.alpha, c.lambda, c.tau, c.beta)
}

fn guard<F: FnOnce() -> GmolStatus>(f: F) -> GmolStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => GmolStatus::Panic,
    }
}

macro_rules! nonnull {
    ($ptr:expr) => {
        if $ptr.is_null() {
            return GmolStatus::InvalidArgument;
        }
    };
}

/// Validate a parameter vector. Returns Ok when (alpha, lambda, tau, beta)
/// lies in the admissible domain.
#[no_mangle]
pub unsafe extern "C" fn gmol_params_validate(params: *const GmolParamsC) -> GmolStatus {
    guard(|| {
        nonnull!(params);
        match to_params(unsafe { &*params }) {
            Ok(_) => GmolStatus::Ok,
            Err(e) => status_of(&e),
        }
    })
}

fn scalar_entry(
    params: *const GmolParamsC,
    x: f64,
    out: *mut f64,
    eval: impl Fn(&GmolParams, f64) -> Result<f64, Error>,
) -> GmolStatus {
    guard(|| {
        nonnull!(params);
        nonnull!(out);
        let theta = match to_params(unsafe { &*params }) {
            Ok(t) => t,
            Err(e) => return status_of(&e),
        };
        match eval(&theta, x) {
            Ok(v) => {
                unsafe { *out = v };
                GmolStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// CDF at `x`.
#[no_mangle]
pub unsafe extern "C" fn gmol_cdf(params: *const GmolParamsC, x: f64, out: *mut f64) -> GmolStatus {
    scalar_entry(params, x, out, |t, x| t.cdf(x))
}

/// Density at `x`.
#[no_mangle]
pub unsafe extern "C" fn gmol_pdf(params: *const GmolParamsC, x: f64, out: *mut f64) -> GmolStatus {
    scalar_entry(params, x, out, |t, x| t.pdf(x))
}

/// Survival 1 − F(x).
#[no_mangle]
pub unsafe extern "C" fn gmol_survival(params: *const GmolParamsC, x: f64, out: *mut f64) -> GmolStatus {
    scalar_entry(params, x, out, |t, x| t.survival(x))
}

/// Hazard rate pdf/survival.
#[no_mangle]
pub unsafe extern "C" fn gmol_hrf(params: *const GmolParamsC, x: f64, out: *mut f64) -> GmolStatus {
    scalar_entry(params, x, out, |t, x| t.hrf(x))
}

/// Quantile at probability `u` in (0, 1).
#[no_mangle]
pub unsafe extern "C" fn gmol_quantile(params: *const GmolParamsC, u: f64, out: *mut f64) -> GmolStatus {
    scalar_entry(params, u, out, |t, u| t.quantile(u))
}

/// Draw `n` values by seeded inverse-transform sampling into `out`
/// (capacity at least `n`).
#[no_mangle]
pub unsafe extern "C" fn gmol_sample(
    params: *const GmolParamsC,
    n: usize,
    seed: u64,
    out: *mut f64,
) -> GmolStatus {
    guard(|| {
        nonnull!(params);
        if n == 0 {
            return GmolStatus::InvalidArgument;
        }
        nonnull!(out);
        let theta = match to_params(unsafe { &*params }) {
            Ok(t) => t,
            Err(e) => return status_of(&e),
        };
        let draws = theta.sample(n, seed);
        let slice = unsafe { std::slice::from_raw_parts_mut(out, n) };
        slice.copy_from_slice(&draws);
        GmolStatus::Ok
    })
}

/// Log-likelihood of `data[0..n]` under the given parameters.
#[no_mangle]
pub unsafe extern "C" fn gmol_loglik(
    params: *const GmolParamsC,
    data: *const f64,
    n: usize,
    out: *mut f64,
) -> GmolStatus {
    guard(|| {
        nonnull!(params);
        nonnull!(data);
        nonnull!(out);
        if n == 0 {
            return GmolStatus::InvalidArgument;
        }
        let theta = match to_params(unsafe { &*params }) {
            Ok(t) => t,
            Err(e) => return status_of(&e),
        };
        let xs = unsafe { std::slice::from_raw_parts(data, n) };
        let sample = match IidSample::new(xs.to_vec()) {
            Ok(s) => s,
            Err(e) => return status_of(&e),
        };
        unsafe { *out = gmol::loglik_iid(&theta, &sample) };
        GmolStatus::Ok
    })
}

/// Fit `model` to `data[0..n]` by maximum likelihood. `init` may be null
/// (the default deterministic start is used). On success `*out` owns a new
/// fit handle; release it with `gmol_fit_free`.
#[no_mangle]
pub unsafe extern "C" fn gmol_fit_mle(
    data: *const f64,
    n: usize,
    model: GmolModel,
    init: *const GmolParamsC,
    seed: u64,
    out: *mut *mut GmolFit,
) -> GmolStatus {
    guard(|| {
        nonnull!(data);
        nonnull!(out);
        if n == 0 {
            return GmolStatus::InvalidArgument;
        }
        let xs = unsafe { std::slice::from_raw_parts(data, n) }.to_vec();
        let sample = match IidSample::new(xs.clone()) {
            Ok(s) => s,
            Err(e) => return status_of(&e),
        };
        let init = if init.is_null() {
            None
        } else {
            match to_params(unsafe { &*init }) {
                Ok(t) => Some(t),
                Err(e) => return status_of(&e),
            }
        };
        let opts = FitOptions {
            optimizer: OptimizerConfig { jitter_seed: seed, ..Default::default() },
        };
        match fit_mle_with(&sample, model.into(), init, &opts) {
            Ok(fit) => {
                let handle = Box::new(GmolFit { inner: fit, data: xs });
                unsafe { *out = Box::into_raw(handle) };
                GmolStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Fitted parameter vector.
#[no_mangle]
pub unsafe extern "C" fn gmol_fit_params(fit: *const GmolFit, out: *mut GmolParamsC) -> GmolStatus {
    guard(|| {
        nonnull!(fit);
        nonnull!(out);
        let f = unsafe { &*fit };
        let t = &f.inner.theta_hat;
        unsafe {
            *out = GmolParamsC {
                alpha: t.alpha(),
                lambda: t.lambda(),
                tau: t.tau(),
                beta: t.beta(),
            };
        }
        GmolStatus::Ok
    })
}

/// Standard errors in canonical (alpha, lambda, tau, beta) order; entries
/// for parameters the model pins are NaN, as is everything when the
/// information matrix was singular. `out` must hold 4 values.
#[no_mangle]
pub unsafe extern "C" fn gmol_fit_se(fit: *const GmolFit, out: *mut f64) -> GmolStatus {
    guard(|| {
        nonnull!(fit);
        nonnull!(out);
        let f = unsafe { &*fit };
        let slice = unsafe { std::slice::from_raw_parts_mut(out, 4) };
        slice.fill(f64::NAN);
        if let Some(se) = &f.inner.se {
            let idx: &[usize] = match f.inner.model {
                SubModel::Gmol => &[0, 1, 2, 3],
                SubModel::Mol => &[0, 2, 3],
                SubModel::Lomax => &[2, 3],
            };
            for (slot, v) in idx.iter().zip(se) {
                slice[*slot] = *v;
            }
        }
        GmolStatus::Ok
    })
}

/// Maximized log-likelihood.
#[no_mangle]
pub unsafe extern "C" fn gmol_fit_loglik(fit: *const GmolFit, out: *mut f64) -> GmolStatus {
    guard(|| {
        nonnull!(fit);
        nonnull!(out);
        unsafe { *out = (*fit).inner.loglik };
        GmolStatus::Ok
    })
}

/// Whether the optimizer met its tolerances (1) or not (0).
#[no_mangle]
pub unsafe extern "C" fn gmol_fit_converged(fit: *const GmolFit, out: *mut i32) -> GmolStatus {
    guard(|| {
        nonnull!(fit);
        nonnull!(out);
        unsafe { *out = (*fit).inner.converged as i32 };
        GmolStatus::Ok
    })
}

/// Goodness-of-fit statistics of the fit on its own data.
#[no_mangle]
pub unsafe extern "C" fn gmol_fit_gof(fit: *const GmolFit, out: *mut GmolGof) -> GmolStatus {
    guard(|| {
        nonnull!(fit);
        nonnull!(out);
        let f = unsafe { &*fit };
        let sample = match IidSample::new(f.data.clone()) {
            Ok(s) => s,
            Err(e) => return status_of(&e),
        };
        match gof_stats(&f.inner, &sample) {
            Ok(g) => {
                unsafe {
                    *out = GmolGof {
                        w_star: g.w_star,
                        a_star: g.a_star,
                        ks: g.ks,
                        ks_p: g.ks_p,
                        aic: g.aic,
                        caic: g.caic,
                        bic: g.bic,
                        hqic: g.hqic,
                    };
                }
                GmolStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Release a fit handle. Null is a no-op; a handle must not be used after
/// it has been freed.
#[no_mangle]
pub unsafe extern "C" fn gmol_fit_free(fit: *mut GmolFit) {
    if !fit.is_null() {
        drop(unsafe { Box::from_raw(fit) });
    }
}
