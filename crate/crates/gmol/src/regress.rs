//! Right-censored regression with log-linear systematic components on the
//! Lomax scale and shape: β_i = exp(v_i·η₁), τ_i = exp(v_i·η₂), with the
//! generator parameters α, λ shared across observations.

use crate::dist::{GmolParams, SubModel};
use crate::error::{Error, Result};
use crate::fit::{se_from_cov, FitOptions};
use crate::optim::{nelder_mead, numerical_hessian};
use crate::special::{chi_square_sf, std_normal_cdf, std_normal_quantile};
use nalgebra::DMatrix;

/// Observed times, censoring indicators and the covariate matrix
/// (first column constant one).
#[derive(Debug, Clone)]
pub struct CensoredDesign {
    x: Vec<f64>,
    delta: Vec<u8>,
    v: DMatrix<f64>,
}

impl CensoredDesign {
    pub fn new(x: Vec<f64>, delta: Vec<u8>, v: DMatrix<f64>) -> Result<Self> {
        let n = x.len();
        if n == 0 {
            return Err(Error::Design("design is empty".into()));
        }
        if delta.len() != n || v.nrows() != n {
            return Err(Error::Design(format!(
                "length mismatch: {} times, {} indicators, {} covariate rows",
                n,
                delta.len(),
                v.nrows()
            )));
        }
        if let Some(bad) = x.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
            return Err(Error::Design(format!(
                "observed times must be strictly positive and finite, found {bad}"
            )));
        }
        if delta.iter().any(|d| *d > 1) {
            return Err(Error::Design("censoring indicators must be 0 or 1".into()));
        }
        if v.column(0).iter().any(|c| *c != 1.0) {
            return Err(Error::Design("first covariate column must be the constant 1".into()));
        }
        let r = v.ncols();
        let rank = v.clone().svd(false, false).rank(1e-10 * n as f64);
        if rank < r {
            return Err(Error::Design(format!(
                "covariate matrix is rank deficient (rank {rank} < {r} columns)"
            )));
        }
        let failures = delta.iter().filter(|d| **d == 1).count();
        if failures < r + 1 {
            return Err(Error::Design(format!(
                "need at least {} failures to identify {} coefficients, found {failures}",
                r + 1,
                r
            )));
        }
        Ok(CensoredDesign { x, delta, v })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn covariate_count(&self) -> usize {
        self.v.ncols()
    }

    pub fn times(&self) -> &[f64] {
        &self.x
    }

    pub fn indicators(&self) -> &[u8] {
        &self.delta
    }

    pub fn covariates(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn failures(&self) -> usize {
        self.delta.iter().filter(|d| **d == 1).count()
    }
}

/// Regression parameter vector ζ = (α, λ, η₁ᵀ, η₂ᵀ).
#[derive(Debug, Clone, PartialEq)]
pub struct RegParams {
    alpha: f64,
    lambda: f64,
    eta1: Vec<f64>,
    eta2: Vec<f64>,
}

impl RegParams {
    pub fn new(alpha: f64, lambda: f64, eta1: Vec<f64>, eta2: Vec<f64>) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Domain(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Domain(format!("lambda must lie in [0, 1], got {lambda}")));
        }
        if eta1.is_empty() || eta1.len() != eta2.len() {
            return Err(Error::Domain(
                "eta1 and eta2 must be non-empty and of equal length".into(),
            ));
        }
        if eta1.iter().chain(&eta2).any(|e| !e.is_finite()) {
            return Err(Error::Domain("coefficients must be finite".into()));
        }
        Ok(RegParams { alpha, lambda, eta1, eta2 })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn eta1(&self) -> &[f64] {
        &self.eta1
    }

    pub fn eta2(&self) -> &[f64] {
        &self.eta2
    }

    pub fn covariate_count(&self) -> usize {
        self.eta1.len()
    }

    /// Flattened (α, λ, η₁…, η₂…) vector.
    pub fn as_vec(&self) -> Vec<f64> {
        let mut v = vec![self.alpha, self.lambda];
        v.extend_from_slice(&self.eta1);
        v.extend_from_slice(&self.eta2);
        v
    }

    /// Names matching `as_vec`, using the η_{1j}/η_{2j} numbering.
    pub fn param_names(&self) -> Vec<String> {
        let mut names = vec!["alpha".to_string(), "lambda".to_string()];
        for j in 0..self.eta1.len() {
            names.push(format!("eta1{j}"));
        }
        for j in 0..self.eta2.len() {
            names.push(format!("eta2{j}"));
        }
        names
    }
}

/// A fitted regression.
#[derive(Debug, Clone)]
pub struct RegFitResult {
    pub model: SubModel,
    pub zeta_hat: RegParams,
    /// Standard errors for the free parameters (canonical order: the free
    /// generator parameters, then η₁, then η₂); absent when the observed
    /// information is singular.
    pub se: Option<Vec<f64>>,
    /// Wald p-values for the η coefficients only; the generator parameters
    /// are reported without p-values.
    pub wald_p: Option<Vec<f64>>,
    pub loglik: f64,
    pub converged: bool,
    pub n: usize,
}

/// Per-observation systematic components β_i = exp(v·η₁), τ_i = exp(v·η₂).
pub fn systematic_components(zeta: &RegParams, v: &[f64]) -> Result<(f64, f64)> {
    if v.len() != zeta.eta1.len() {
        return Err(Error::Design(format!(
            "covariate row has {} entries, expected {}",
            v.len(),
            zeta.eta1.len()
        )));
    }
    let lin1: f64 = v.iter().zip(&zeta.eta1).map(|(a, b)| a * b).sum();
    let lin2: f64 = v.iter().zip(&zeta.eta2).map(|(a, b)| a * b).sum();
    let beta = lin1.exp();
    let tau = lin2.exp();
    if !beta.is_finite() || !tau.is_finite() || beta == 0.0 || tau == 0.0 {
        return Err(Error::Evaluation(format!(
            "systematic component overflowed: exp({lin1}), exp({lin2})"
        )));
    }
    Ok((beta, tau))
}

/// Censored log-likelihood: failures contribute the log-density, censored
/// observations the log-survival, each at its own (τ_i, β_i). The leading
/// scale term is accumulated per failure because the systematic components
/// vary with i. Non-finite intermediates surface as −∞.
pub fn loglik_censored(zeta: &RegParams, design: &CensoredDesign) -> f64 {
    let (alpha, lambda) = (zeta.alpha, zeta.lambda);
    let mut ll = 0.0_f64;
    let v = design.covariates();
    for i in 0..design.len() {
        let x = design.x[i];
        let row: Vec<f64> = v.row(i).iter().copied().collect();
        let lin1: f64 = row.iter().zip(&zeta.eta1).map(|(a, b)| a * b).sum();
        let lin2: f64 = row.iter().zip(&zeta.eta2).map(|(a, b)| a * b).sum();
        let beta = lin1.exp();
        let tau = lin2.exp();
        if !beta.is_finite() || !tau.is_finite() {
            return f64::NEG_INFINITY;
        }
        let log_ratio = (x / beta).ln_1p();
        let g = -(-tau * log_ratio).exp_m1();
        if design.delta[i] == 1 {
            let bracket = (1.0 - alpha) * (1.0 - lambda) * g * g
                + 2.0 * alpha * (1.0 - lambda) * g
                + alpha * lambda;
            ll += lin2 + tau * lin1 + bracket.ln()
                - (tau + 1.0) * (lin1 + log_ratio)
                - 2.0 * (alpha + (1.0 - alpha) * g).ln();
        } else {
            ll += -tau * log_ratio + (alpha + (1.0 - lambda) * g).ln()
                - (alpha + (1.0 - alpha) * g).ln();
        }
    }
    if ll.is_finite() {
        ll
    } else {
        f64::NEG_INFINITY
    }
}

// ----- transformed space -------------------------------------------------

fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    (p / (1.0 - p)).ln()
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z.clamp(-700.0, 700.0)).exp())
}

fn zeta_to_free(zeta: &RegParams, model: SubModel) -> Vec<f64> {
    let mut v = Vec::new();
    match model {
        SubModel::Gmol => {
            v.push(logit(zeta.alpha));
            v.push(logit(zeta.lambda));
        }
        SubModel::Mol => v.push(logit(zeta.alpha)),
        SubModel::Lomax => {}
    }
    v.extend_from_slice(&zeta.eta1);
    v.extend_from_slice(&zeta.eta2);
    v
}

fn free_to_zeta(v: &[f64], model: SubModel, r: usize) -> RegParams {
    let (alpha, lambda, rest) = match model {
        SubModel::Gmol => (sigmoid(v[0]).max(f64::MIN_POSITIVE), sigmoid(v[1]), &v[2..]),
        SubModel::Mol => (sigmoid(v[0]).max(f64::MIN_POSITIVE), 1.0, &v[1..]),
        SubModel::Lomax => (1.0, 1.0, v),
    };
    RegParams {
        alpha,
        lambda,
        eta1: rest[..r].to_vec(),
        eta2: rest[r..2 * r].to_vec(),
    }
}

fn jacobian_diag(v: &[f64], model: SubModel, r: usize) -> Vec<f64> {
    let dsig = |z: f64| {
        let s = sigmoid(z);
        s * (1.0 - s)
    };
    let mut j = Vec::new();
    match model {
        SubModel::Gmol => {
            j.push(dsig(v[0]));
            j.push(dsig(v[1]));
        }
        SubModel::Mol => j.push(dsig(v[0])),
        SubModel::Lomax => {}
    }
    j.extend(std::iter::repeat(1.0).take(2 * r));
    j
}

/// Fit the regression with the default search protocol.
pub fn fit_regression(
    design: &CensoredDesign,
    model: SubModel,
    init: Option<RegParams>,
) -> Result<RegFitResult> {
    fit_regression_with(design, model, init, &FitOptions::default())
}

/// Fit the regression by maximizing the censored log-likelihood in
/// transformed space (logit for the generator parameters, identity for the
/// coefficients). Wald p-values 2(1 − Φ(|η̂/se|)) are attached to the η
/// coefficients; the generator parameters are left without p-values.
pub fn fit_regression_with(
    design: &CensoredDesign,
    model: SubModel,
    init: Option<RegParams>,
    opts: &FitOptions,
) -> Result<RegFitResult> {
    let r = design.covariate_count();
    if let Some(z) = &init {
        if z.covariate_count() != r {
            return Err(Error::Design(format!(
                "initial point has {} coefficients per component, design has {r}",
                z.covariate_count()
            )));
        }
    }
    let objective = |v: &[f64]| loglik_censored(&free_to_zeta(v, model, r), design);

    let mut starts: Vec<Vec<f64>> = Vec::new();
    match init {
        Some(z) => starts.push(zeta_to_free(&z, model)),
        None => {
            // moment start on the observed failures, intercept-only links
            let failures: Vec<f64> = design
                .times()
                .iter()
                .zip(design.indicators())
                .filter(|(_, d)| **d == 1)
                .map(|(x, _)| *x)
                .collect();
            let (tau0, beta0) = crate::fit::lomax_moment_start(&failures);
            let mut eta1 = vec![0.0; r];
            let mut eta2 = vec![0.0; r];
            eta1[0] = beta0.ln();
            eta2[0] = tau0.ln();
            let base = RegParams::new(0.9, 0.9, eta1, eta2).unwrap();
            starts.push(zeta_to_free(&base, model));
            if model != SubModel::Lomax {
                let nested_model = match model {
                    SubModel::Gmol => SubModel::Mol,
                    _ => SubModel::Lomax,
                };
                if let Ok(nested) = fit_regression_with(design, nested_model, None, opts) {
                    let z = nested.zeta_hat;
                    let warm = match model {
                        SubModel::Gmol => RegParams::new(
                            z.alpha,
                            1.0 - 1e-7,
                            z.eta1.clone(),
                            z.eta2.clone(),
                        ),
                        _ => RegParams::new(1.0 - 1e-7, 1.0, z.eta1.clone(), z.eta2.clone()),
                    };
                    if let Ok(w) = warm {
                        starts.push(zeta_to_free(&w, model));
                    }
                }
            }
        }
    }

    let mut best: Option<crate::optim::OptResult> = None;
    for s in &starts {
        match nelder_mead(objective, s, &opts.optimizer) {
            Ok(run) => {
                if best.as_ref().map_or(true, |b| run.f_opt > b.f_opt) {
                    best = Some(run);
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

    let zeta_hat = free_to_zeta(&run.x_opt, model, r);
    let se = numerical_hessian(&objective, &run.x_opt)
        .ok()
        .and_then(|h| (-h).try_inverse())
        .and_then(|cov| se_from_cov(&cov, &jacobian_diag(&run.x_opt, model, r)));
    let wald_p = se.as_ref().map(|se| {
        let skip = match model {
            SubModel::Gmol => 2,
            SubModel::Mol => 1,
            SubModel::Lomax => 0,
        };
        let coeffs = zeta_hat.eta1.iter().chain(&zeta_hat.eta2);
        coeffs
            .zip(se[skip..].iter())
            .map(|(est, s)| 2.0 * (1.0 - std_normal_cdf((est / s).abs())))
            .collect::<Vec<f64>>()
    });

    Ok(RegFitResult {
        model,
        zeta_hat,
        se,
        wald_p,
        loglik: run.f_opt,
        converged: run.converged,
        n: design.len(),
    })
}

/// Map a likelihood-ratio statistic to its chi-square upper-tail p-value.
pub fn lr_pvalue(statistic: f64, df: u32) -> Result<f64> {
    chi_square_sf(statistic, df)
}

/// Likelihood-ratio test of a nested restriction:
/// statistic 2(ℓ_full − ℓ_nested) clamped at zero, chi-square reference
/// with `df` degrees of freedom.
pub fn lr_test(full: &RegFitResult, nested: &RegFitResult, df: u32) -> Result<(f64, f64)> {
    if df < 1 {
        return Err(Error::Domain("lr_test requires df >= 1".into()));
    }
    let mut statistic = 2.0 * (full.loglik - nested.loglik);
    if statistic < -1e-6 {
        return Err(Error::Inconsistent(format!(
            "nested fit has higher likelihood than the full fit (difference {statistic})"
        )));
    }
    if statistic < 0.0 {
        statistic = 0.0;
    }
    Ok((statistic, lr_pvalue(statistic, df)?))
}

/// Normalized quantile residuals Φ⁻¹(F(x_i)) under the fitted conditional
/// distributions, each tagged with its censoring indicator so diagnostics
/// can include or exclude the censored points.
pub fn quantile_residuals(fit: &RegFitResult, design: &CensoredDesign) -> Result<Vec<(f64, u8)>> {
    if !fit.converged {
        return Err(Error::NonConvergence(
            "quantile residuals require a converged fit".into(),
        ));
    }
    let zeta = &fit.zeta_hat;
    let mut out = Vec::with_capacity(design.len());
    for i in 0..design.len() {
        let row: Vec<f64> = design.covariates().row(i).iter().copied().collect();
        let (beta_i, tau_i) = systematic_components(zeta, &row)?;
        let theta = GmolParams::new(zeta.alpha(), zeta.lambda(), tau_i, beta_i)?;
        let u = theta
            .cdf_unchecked(design.times()[i])
            .clamp(1e-15, 1.0 - 1e-15);
        out.push((std_normal_quantile(u)?, design.indicators()[i]));
    }
    Ok(out)
}
