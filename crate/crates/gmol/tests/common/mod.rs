//! Shared test oracles, independent of the library's own numerics.
#![allow(dead_code)]

use gmol::GmolParams;

/// Adaptive Simpson quadrature.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        m: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, m, b, fa, fm, fb, whole, tol, 64)
}

/// ∫₀^∞ x^p f(x; θ) dx by substituting the baseline survival level
/// w = [β/(β+x)]^τ (mapping the half line onto (0, 1)) and then
/// w = s^{τ/(τ−p)}, which removes the algebraic w^{−p/τ} endpoint
/// singularity so plain Simpson converges.
pub fn moment_quadrature(p: u32, theta: &GmolParams, tol: f64) -> f64 {
    let (alpha, lambda) = (theta.alpha(), theta.lambda());
    let (tau, beta) = (theta.tau(), theta.beta());
    let q = tau / (tau - p as f64);
    let integrand = move |s: f64| {
        let w = s.powf(q);
        let x = beta * ((-w.ln() / tau).exp() - 1.0);
        let g = 1.0 - w;
        let bracket = alpha * lambda
            + 2.0 * alpha * (1.0 - lambda) * g
            + (1.0 - alpha) * (1.0 - lambda) * g * g;
        let den = 1.0 - (1.0 - alpha) * w;
        x.powi(p as i32) * bracket / (den * den) * q * s.powf(q - 1.0)
    };
    simpson(&integrand, 1e-14, 1.0, tol)
}

/// Lower incomplete beta ∫₀^z t^{a−1}(1−t)^{b−1} dt with the substitution
/// t = z s^{1/a}, which removes the t^{a−1} endpoint singularity:
/// the integral becomes (z^a/a) ∫₀^1 (1 − z s^{1/a})^{b−1} ds.
pub fn lower_beta_quadrature(z: f64, a: f64, b: f64, tol: f64) -> f64 {
    let integrand = move |s: f64| (1.0 - z * s.powf(1.0 / a)).powf(b - 1.0);
    z.powf(a) / a * simpson(&integrand, 0.0, 1.0 - 1e-14, tol)
}

/// ∫₀^s x^p f(x; θ) dx directly on the x axis.
pub fn incomplete_moment_quadrature(p: u32, s: f64, theta: &GmolParams, tol: f64) -> f64 {
    let th = *theta;
    simpson(&move |x: f64| x.powi(p as i32) * th.pdf(x).unwrap(), 0.0, s, tol)
}

/// Total probability mass by quadrature over the baseline level.
pub fn mass_quadrature(theta: &GmolParams, tol: f64) -> f64 {
    let (alpha, lambda) = (theta.alpha(), theta.lambda());
    let integrand = move |w: f64| {
        let g = 1.0 - w;
        let bracket = alpha * lambda
            + 2.0 * alpha * (1.0 - lambda) * g
            + (1.0 - alpha) * (1.0 - lambda) * g * g;
        let den = 1.0 - (1.0 - alpha) * w;
        bracket / (den * den)
    };
    simpson(&integrand, 0.0, 1.0, tol)
}

/// Invert the CDF by bisection to 1e-12, independent of the closed-form
/// quantile.
pub fn quantile_bisection(u: f64, theta: &GmolParams) -> f64 {
    let mut hi = theta.beta();
    while theta.cdf(hi).unwrap() < u {
        hi *= 2.0;
        assert!(hi.is_finite());
    }
    let mut lo = 0.0_f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if theta.cdf(mid).unwrap() < u {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * (1.0 + hi) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Centered finite difference of the CDF. In the upper tail the CDF values
/// agree to many digits and the subtraction hits the f64 rounding floor, so
/// the difference is taken on the survival side there.
pub fn cdf_slope(theta: &GmolParams, x: f64, h: f64) -> f64 {
    let lo = (x - h).max(0.0);
    if theta.cdf(x).unwrap() < 0.5 {
        (theta.cdf(x + h).unwrap() - theta.cdf(lo).unwrap()) / (x + h - lo)
    } else {
        (theta.survival(lo).unwrap() - theta.survival(x + h).unwrap()) / (x + h - lo)
    }
}

/// The three iid recovery scenarios exercised throughout the tests.
pub fn table_scenarios() -> Vec<GmolParams> {
    vec![
        GmolParams::new(0.2, 0.6, 0.5, 0.8).unwrap(),
        GmolParams::new(0.1, 0.3, 1.5, 3.0).unwrap(),
        GmolParams::new(0.5, 0.4, 9.0, 7.0).unwrap(),
    ]
}

/// Log-spaced grid between `lo` and `hi`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (la, lb) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (la + (lb - la) * i as f64 / (points - 1) as f64).exp())
        .collect()
}
