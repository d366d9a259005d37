//! Derivative-free maximization (Nelder-Mead with seeded multi-start) and
//! central-difference curvature estimation.

use crate::dist::open_unit;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stopping rules and restart policy for the simplex search.
#[derive(Debug, Clone, Copy)]
pub struct OptimizerConfig {
    /// Iteration cap for a single simplex run.
    pub max_iter: usize,
    /// Stop when the simplex function spread falls below this.
    pub f_tol: f64,
    /// Stop when the simplex coordinate spread falls below this.
    pub x_tol: f64,
    /// Number of jittered restarts around the incumbent after the first run.
    pub restarts: usize,
    /// Seed for the restart jitter stream.
    pub jitter_seed: u64,
    /// Relative size of the initial simplex steps. Small values keep the
    /// search inside the starting basin; the default matches common
    /// simplex implementations.
    pub init_step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_iter: 5000,
            f_tol: 1e-10,
            x_tol: 1e-9,
            restarts: 5,
            jitter_seed: 0,
            init_step: 0.05,
        }
    }
}

impl OptimizerConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iter == 0 || !(self.f_tol > 0.0) || !(self.x_tol > 0.0) {
            return Err(Error::Domain(
                "optimizer tolerances and iteration cap must be positive".into(),
            ));
        }
        if !(self.init_step > 0.0) {
            return Err(Error::Domain("init_step must be positive".into()));
        }
        Ok(())
    }
}

/// Result of a maximization run.
#[derive(Debug, Clone)]
pub struct OptResult {
    /// Best point found.
    pub x_opt: Vec<f64>,
    /// Objective value at `x_opt` (maximization scale).
    pub f_opt: f64,
    /// Whether the run that produced the incumbent met both tolerances.
    pub converged: bool,
    /// Total simplex iterations across all starts.
    pub iterations: usize,
    /// Restarts actually performed.
    pub restarts_used: usize,
}

// Standard coefficients: reflection 1, expansion 2, contraction 0.5, shrink 0.5.
const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

struct SimplexRun {
    x: Vec<f64>,
    f: f64,
    converged: bool,
    iterations: usize,
}

fn run_simplex<F: Fn(&[f64]) -> f64>(
    cost: &F,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<SimplexRun> {
    let n = x0.len();
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    points.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += if p[i] != 0.0 {
            cfg.init_step * p[i].abs()
        } else {
            cfg.init_step * 0.005
        };
        points.push(p);
    }
    let mut values: Vec<f64> = points.iter().map(|p| cost(p)).collect();
    if values.iter().all(|v| !v.is_finite()) {
        return Err(Error::Initialization(
            "objective is non-finite at every vertex of the initial simplex".into(),
        ));
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        iterations += 1;
        // order the simplex
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
        let best = idx[0];
        let worst = idx[n];
        let second_worst = idx[n - 1];

        let f_spread = values[worst] - values[best];
        let x_spread = points
            .iter()
            .flat_map(|p| p.iter().zip(&points[best]).map(|(a, b)| (a - b).abs()))
            .fold(0.0_f64, f64::max);
        if f_spread.abs() < cfg.f_tol && x_spread < cfg.x_tol {
            converged = true;
            break;
        }

        // centroid of all but the worst
        let mut centroid = vec![0.0; n];
        for (k, p) in points.iter().enumerate() {
            if k == worst {
                continue;
            }
            for (c, pi) in centroid.iter_mut().zip(p) {
                *c += pi / n as f64;
            }
        }

        let blend = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&points[worst])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = blend(REFLECT);
        let fr = cost(&xr);
        if fr < values[best] {
            let xe = blend(EXPAND);
            let fe = cost(&xe);
            if fe < fr {
                points[worst] = xe;
                values[worst] = fe;
            } else {
                points[worst] = xr;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            points[worst] = xr;
            values[worst] = fr;
        } else {
            let (xc, fc) = if fr < values[worst] {
                let xc = blend(CONTRACT);
                let fc = cost(&xc);
                (xc, fc)
            } else {
                let xc = blend(-CONTRACT);
                let fc = cost(&xc);
                (xc, fc)
            };
            if fc < values[worst].min(fr) {
                points[worst] = xc;
                values[worst] = fc;
            } else {
                // shrink toward the best vertex
                let anchor = points[best].clone();
                for (k, p) in points.iter_mut().enumerate() {
                    if k == best {
                        continue;
                    }
                    for (pi, ai) in p.iter_mut().zip(&anchor) {
                        *pi = ai + SHRINK * (*pi - ai);
                    }
                    values[k] = cost(p);
                }
            }
        }
    }

    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(i, _)| i)
        .unwrap();
    Ok(SimplexRun {
        x: points[best].clone(),
        f: values[best],
        converged,
        iterations,
    })
}

/// Maximize `objective` from `x0`, implemented as minimization of the
/// negation. Each restart re-seeds the simplex around the incumbent with
/// 10% relative jitter drawn from a deterministic stream.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(
    objective: F,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<OptResult> {
    cfg.validate()?;
    if x0.is_empty() {
        return Err(Error::Domain("nelder_mead requires at least one coordinate".into()));
    }
    let cost = |x: &[f64]| -> f64 {
        let v = objective(x);
        if v.is_finite() {
            -v
        } else {
            f64::INFINITY
        }
    };

    let mut incumbent = run_simplex(&cost, x0, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.jitter_seed);
    let mut restarts_used = 0;
    let mut total_iter = incumbent.iterations;
    for _ in 0..cfg.restarts {
        let start: Vec<f64> = incumbent
            .x
            .iter()
            .map(|&xi| {
                let noise = 0.2 * open_unit(&mut rng) - 0.1;
                if xi.abs() > 1e-12 {
                    xi * (1.0 + noise)
                } else {
                    noise
                }
            })
            .collect();
        restarts_used += 1;
        if let Ok(run) = run_simplex(&cost, &start, cfg) {
            total_iter += run.iterations;
            if run.f < incumbent.f {
                incumbent = run;
            }
        }
    }

    Ok(OptResult {
        f_opt: -incumbent.f,
        x_opt: incumbent.x,
        converged: incumbent.converged,
        iterations: total_iter,
        restarts_used,
    })
}

/// Central-difference Hessian with per-coordinate step
/// h_i = max(1e-5, 1e-4·|x_i|), symmetrized as (H + Hᵀ)/2.
pub fn numerical_hessian<F: Fn(&[f64]) -> f64>(objective: F, x: &[f64]) -> Result<DMatrix<f64>> {
    let n = x.len();
    let h: Vec<f64> = x.iter().map(|xi| (1e-4 * xi.abs()).max(1e-5)).collect();
    let eval = |p: &[f64]| -> Result<f64> {
        let v = objective(p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation(format!(
                "objective non-finite at stencil point {p:?}"
            )))
        }
    };
    let f0 = eval(x)?;
    let mut hess = DMatrix::zeros(n, n);
    let mut buf = x.to_vec();
    for i in 0..n {
        buf.copy_from_slice(x);
        buf[i] = x[i] + h[i];
        let fp = eval(&buf)?;
        buf[i] = x[i] - h[i];
        let fm = eval(&buf)?;
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for j in (i + 1)..n {
            buf.copy_from_slice(x);
            buf[i] = x[i] + h[i];
            buf[j] = x[j] + h[j];
            let fpp = eval(&buf)?;
            buf[j] = x[j] - h[j];
            let fpm = eval(&buf)?;
            buf[i] = x[i] - h[i];
            buf[j] = x[j] + h[j];
            let fmp = eval(&buf)?;
            buf[j] = x[j] - h[j];
            let fmm = eval(&buf)?;
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    let sym = (&hess + hess.transpose()) * 0.5;
    Ok(sym)
}
