//! Maximum likelihood for iid samples: point estimates in a transformed
//! parameter space, observed-information standard errors, goodness-of-fit
//! statistics, information criteria and the non-nested comparison test.

use crate::dist::{lomax_cdf_unchecked, GmolParams, SubModel};
use crate::error::{Error, Result};
use crate::optim::{nelder_mead, numerical_hessian, OptimizerConfig};
use crate::special::{kolmogorov_p, std_normal_cdf};
use nalgebra::DMatrix;

/// Positive iid observations.
#[derive(Debug, Clone)]
pub struct IidSample {
    x: Vec<f64>,
}

impl IidSample {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Design("sample is empty".into()));
        }
        if let Some(bad) = x.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::Design(format!(
                "observations must be strictly positive and finite, found {bad}"
            )));
        }
        Ok(IidSample { x })
    }

    pub fn observations(&self) -> &[f64] {
        &self.x
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// A fitted model.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: SubModel,
    pub theta_hat: GmolParams,
    /// Standard errors for the free parameters in canonical order, absent
    /// when the observed information is singular.
    pub se: Option<Vec<f64>>,
    pub loglik: f64,
    pub converged: bool,
    pub n: usize,
}

/// Goodness-of-fit statistics and information criteria.
#[derive(Debug, Clone, Copy)]
pub struct GofReport {
    pub w_star: f64,
    pub a_star: f64,
    pub ks: f64,
    pub ks_p: f64,
    pub aic: f64,
    pub caic: f64,
    pub bic: f64,
    pub hqic: f64,
}

/// Log-likelihood of an iid sample, in the grouped form
/// `n log(τβ^τ) + Σ log[(1−α)(1−λ)G² + 2α(1−λ)G + αλ]
///  − (τ+1) Σ log(β+x) − 2 Σ log[α + (1−α)G]`.
///
/// Non-finite intermediates (bracket underflow at extreme parameters) are
/// surfaced as −∞ so optimizers steer away rather than abort.
pub fn loglik_iid(theta: &GmolParams, sample: &IidSample) -> f64 {
    let (alpha, lambda) = (theta.alpha(), theta.lambda());
    let (tau, beta) = (theta.tau(), theta.beta());
    let n = sample.len() as f64;
    let mut bracket_sum = 0.0;
    let mut log_scale_sum = 0.0;
    let mut denom_sum = 0.0;
    for &x in sample.observations() {
        let g = lomax_cdf_unchecked(x, tau, beta);
        let bracket = (1.0 - alpha) * (1.0 - lambda) * g * g
            + 2.0 * alpha * (1.0 - lambda) * g
            + alpha * lambda;
        bracket_sum += bracket.ln();
        log_scale_sum += beta.ln() + (x / beta).ln_1p();
        denom_sum += (alpha + (1.0 - alpha) * g).ln();
    }
    let ll = n * (tau.ln() + tau * beta.ln()) + bracket_sum
        - (tau + 1.0) * log_scale_sum
        - 2.0 * denom_sum;
    if ll.is_finite() {
        ll
    } else {
        f64::NEG_INFINITY
    }
}

// ----- transformed parameter space -------------------------------------

fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    (p / (1.0 - p)).ln()
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z.clamp(-700.0, 700.0)).exp())
}

pub(crate) fn theta_to_free(theta: &GmolParams, model: SubModel) -> Vec<f64> {
    match model {
        SubModel::Gmol => vec![
            logit(theta.alpha()),
            logit(theta.lambda()),
            theta.tau().ln(),
            theta.beta().ln(),
        ],
        SubModel::Mol => vec![logit(theta.alpha()), theta.tau().ln(), theta.beta().ln()],
        SubModel::Lomax => vec![theta.tau().ln(), theta.beta().ln()],
    }
}

pub(crate) fn free_to_theta(v: &[f64], model: SubModel) -> GmolParams {
    let (alpha, lambda, tau, beta) = match model {
        SubModel::Gmol => (sigmoid(v[0]), sigmoid(v[1]), v[2].exp(), v[3].exp()),
        SubModel::Mol => (sigmoid(v[0]), 1.0, v[1].exp(), v[2].exp()),
        SubModel::Lomax => (1.0, 1.0, v[0].exp(), v[1].exp()),
    };
    // sigmoid/exp keep every coordinate inside the open domain, other than
    // alpha saturating at exactly 1.0 for large inputs, which is admissible
    GmolParams::new(alpha.max(f64::MIN_POSITIVE), lambda, tau.max(f64::MIN_POSITIVE),
        beta.max(f64::MIN_POSITIVE))
        .expect("transformed parameters are always in the valid domain")
}

// derivative of the back-transform, for the delta method
fn jacobian_diag(v: &[f64], model: SubModel) -> Vec<f64> {
    let dsig = |z: f64| {
        let s = sigmoid(z);
        s * (1.0 - s)
    };
    match model {
        SubModel::Gmol => vec![dsig(v[0]), dsig(v[1]), v[2].exp(), v[3].exp()],
        SubModel::Mol => vec![dsig(v[0]), v[1].exp(), v[2].exp()],
        SubModel::Lomax => vec![v[0].exp(), v[1].exp()],
    }
}

/// Method-of-moments Lomax start: match mean and variance, fall back to a
/// mildly heavy-tailed shape when the sample is underdispersed.
pub(crate) fn lomax_moment_start(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    let ratio = var / (mean * mean);
    let tau = if ratio > 1.02 { (2.0 * ratio / (ratio - 1.0)).clamp(0.2, 50.0) } else { 3.0 };
    let beta = if tau > 1.0 { mean * (tau - 1.0) } else { mean };
    (tau, beta.max(1e-8))
}

/// Options controlling a fit beyond the data and model choice.
#[derive(Debug, Clone, Copy, Default)]
pub struct FitOptions {
    pub optimizer: OptimizerConfig,
}

/// Fit by maximum likelihood with the default search protocol.
pub fn fit_mle(sample: &IidSample, model: SubModel, init: Option<GmolParams>) -> Result<FitResult> {
    fit_mle_with(sample, model, init, &FitOptions::default())
}

/// Fit by maximum likelihood.
///
/// The free parameters are searched in transformed space (logit for α and
/// λ, log for τ and β). When no starting point is supplied, the search
/// starts from the method-of-moments Lomax solution with α = λ = 0.9 and,
/// for the larger models, additionally warm-starts from the fitted nested
/// sub-model so the likelihood ordering of nested fits is preserved.
pub fn fit_mle_with(
    sample: &IidSample,
    model: SubModel,
    init: Option<GmolParams>,
    opts: &FitOptions,
) -> Result<FitResult> {
    let k = model.free_params();
    if sample.len() < k + 1 {
        return Err(Error::Design(format!(
            "need at least {} observations to fit {} free parameters",
            k + 1,
            k
        )));
    }
    let objective = |v: &[f64]| loglik_iid(&free_to_theta(v, model), sample);

    let mut starts: Vec<Vec<f64>> = Vec::new();
    match init {
        Some(theta) => starts.push(theta_to_free(&theta, model)),
        None => {
            let (tau0, beta0) = lomax_moment_start(sample.observations());
            // coarse scan over the generator parameters at the moment
            // start, keeping the two most promising corners; this plays
            // the global-search role a stochastic initializer would
            let grid = [0.15, 0.5, 0.9];
            let mut scored: Vec<(f64, GmolParams)> = Vec::new();
            match model {
                SubModel::Lomax => {
                    scored.push((
                        0.0,
                        GmolParams::new(1.0, 1.0, tau0, beta0)
                            .unwrap_or_else(|_| GmolParams::new(1.0, 1.0, 1.0, 1.0).unwrap()),
                    ));
                }
                SubModel::Mol => {
                    for a in grid {
                        if let Ok(th) = GmolParams::new(a, 1.0, tau0, beta0) {
                            scored.push((loglik_iid(&th, sample), th));
                        }
                    }
                }
                SubModel::Gmol => {
                    for a in grid {
                        for l in grid {
                            if let Ok(th) = GmolParams::new(a, l, tau0, beta0) {
                                scored.push((loglik_iid(&th, sample), th));
                            }
                        }
                    }
                }
            }
            scored.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal));
            for (_, th) in scored.iter().take(2) {
                starts.push(theta_to_free(th, model));
            }
            if model != SubModel::Lomax {
                // warm start from the nested fit keeps loglik monotone
                // across the sub-model lattice
                let nested_model = match model {
                    SubModel::Gmol => SubModel::Mol,
                    _ => SubModel::Lomax,
                };
                if let Ok(nested) = fit_mle_with(sample, nested_model, None, opts) {
                    let th = nested.theta_hat;
                    let warm = match model {
                        SubModel::Gmol => {
                            GmolParams::new(th.alpha(), 1.0 - 1e-7, th.tau(), th.beta())
                        }
                        _ => GmolParams::new(1.0 - 1e-7, 1.0, th.tau(), th.beta()),
                    };
                    if let Ok(w) = warm {
                        starts.push(theta_to_free(&w, model));
                    }
                }
            }
        }
    }

    let mut best: Option<crate::optim::OptResult> = None;
    for s in &starts {
        match nelder_mead(objective, s, &opts.optimizer) {
            Ok(r) => {
                if best.as_ref().map_or(true, |b| r.f_opt > b.f_opt) {
                    best = Some(r);
                }
            }
            Err(e) => {
                if best.is_none() && s == starts.last().unwrap() {
                    return Err(e);
                }
            }
        }
    }
    let run = best.ok_or_else(|| Error::NonConvergence("all starting points failed".into()))?;
    if !run.f_opt.is_finite() {
        return Err(Error::NonConvergence("likelihood is not finite at the optimum".into()));
    }

    let theta_hat = free_to_theta(&run.x_opt, model);
    let se = standard_errors(&run.x_opt, model, |v| loglik_iid(&free_to_theta(v, model), sample));
    Ok(FitResult {
        model,
        theta_hat,
        se,
        loglik: run.f_opt,
        converged: run.converged,
        n: sample.len(),
    })
}

/// Delta-method standard errors from the observed information in the
/// transformed space; `None` when the information matrix is singular.
pub(crate) fn standard_errors<F: Fn(&[f64]) -> f64>(
    v_opt: &[f64],
    model: SubModel,
    loglik: F,
) -> Option<Vec<f64>> {
    let hess = numerical_hessian(loglik, v_opt).ok()?;
    let info = -hess;
    let cov = info.try_inverse()?;
    let jac = jacobian_diag(v_opt, model);
    let mut se = Vec::with_capacity(jac.len());
    for (i, j) in jac.iter().enumerate() {
        let var = cov[(i, i)] * j * j;
        if !(var > 0.0) || !var.is_finite() {
            return None;
        }
        se.push(var.sqrt());
    }
    Some(se)
}

pub(crate) fn se_from_cov(cov: &DMatrix<f64>, jac: &[f64]) -> Option<Vec<f64>> {
    let mut se = Vec::with_capacity(jac.len());
    for (i, j) in jac.iter().enumerate() {
        let var = cov[(i, i)] * j * j;
        if !(var > 0.0) || !var.is_finite() {
            return None;
        }
        se.push(var.sqrt());
    }
    Some(se)
}

const PROB_CLAMP: f64 = 1e-15;

/// Cramér-von Mises and Anderson-Darling statistics with the
/// Chen-Balakrishnan small-sample corrections, the Kolmogorov-Smirnov
/// statistic with its asymptotic p-value, and the information criteria.
pub fn gof_stats(fit: &FitResult, sample: &IidSample) -> Result<GofReport> {
    if !fit.converged {
        return Err(Error::NonConvergence(
            "goodness-of-fit statistics require a converged fit".into(),
        ));
    }
    let n = sample.len();
    let nf = n as f64;
    let mut u: Vec<f64> = sample
        .observations()
        .iter()
        .map(|&x| {
            fit.theta_hat
                .cdf_unchecked(x)
                .clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
        })
        .collect();
    u.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut w2 = 1.0 / (12.0 * nf);
    let mut a2 = -nf;
    let mut ks: f64 = 0.0;
    for (idx, &ui) in u.iter().enumerate() {
        let i = (idx + 1) as f64;
        let d = ui - (2.0 * i - 1.0) / (2.0 * nf);
        w2 += d * d;
        a2 -= (2.0 * i - 1.0) / nf * (ui.ln() + (1.0 - u[n - idx - 1]).ln());
        ks = ks.max(i / nf - ui).max(ui - (i - 1.0) / nf);
    }
    let w_star = w2 * (1.0 + 0.5 / nf);
    let a_star = a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf));

    let k = fit.model.free_params() as f64;
    let ll = fit.loglik;
    let aic = 2.0 * k - 2.0 * ll;
    let caic = aic + 2.0 * k * (k + 1.0) / (nf - k - 1.0);
    let bic = k * nf.ln() - 2.0 * ll;
    let hqic = 2.0 * k * nf.ln().ln() - 2.0 * ll;

    Ok(GofReport {
        w_star,
        a_star,
        ks,
        ks_p: kolmogorov_p(ks, n)?,
        aic,
        caic,
        bic,
        hqic,
    })
}

/// Generalized (Vuong) likelihood-ratio statistic for two non-nested fits
/// on the same sample: √n · mean(ℓ) / sd(ℓ) over the per-observation
/// log-density differences, with a two-sided normal p-value. Positive
/// values favor the first model.
pub fn vuong_glr(fit_a: &FitResult, fit_b: &FitResult, sample: &IidSample) -> Result<(f64, f64)> {
    if fit_a.n != sample.len() || fit_b.n != sample.len() {
        return Err(Error::Design(
            "both fits must come from the sample being compared".into(),
        ));
    }
    let n = sample.len() as f64;
    let diffs: Vec<f64> = sample
        .observations()
        .iter()
        .map(|&x| fit_a.theta_hat.log_pdf_unchecked(x) - fit_b.theta_hat.log_pdf_unchecked(x))
        .collect();
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd == 0.0 {
        return Err(Error::Degenerate(
            "per-observation log-density differences have zero variance".into(),
        ));
    }
    let statistic = n.sqrt() * mean / sd;
    let p = 2.0 * (1.0 - std_normal_cdf(statistic.abs()));
    Ok((statistic, p))
}
