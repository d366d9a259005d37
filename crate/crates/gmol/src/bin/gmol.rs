//! CSV-driven command-line front-end.
//!
//! Exit codes: 0 success, 1 input/usage error, 2 numerical non-convergence.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use gmol::csvio::{
    fmt_human, read_censored_csv, read_iid_csv, write_named_csv, write_pairs_csv,
    write_residuals_csv, write_study_csv,
};
use gmol::fit::{fit_mle_with, FitOptions};
use gmol::regress::{fit_regression_with, lr_test, quantile_residuals, CensoredDesign, RegParams};
use gmol::study::{run_iid_study, run_regression_study, StudyConfig, StudyTruth};
use gmol::{gof_stats, Error, GmolParams, OptimizerConfig, SubModel};
use nalgebra::DMatrix;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gmol",
    about = "Generalized Marshall-Olkin Lomax distribution: fitting, censored regression, simulation studies and curve tables over CSV files",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model to an iid sample (CSV with a 'time' column)
    Fit(FitArgs),
    /// Fit a censored regression (CSV with 'time', 'status' and covariates)
    Regress(RegressArgs),
    /// Run a Monte Carlo recovery study and write its table as CSV
    Simulate(SimulateArgs),
    /// Tabulate a distribution curve as a two-column CSV
    Curve(CurveArgs),
}

#[derive(Args)]
struct FitArgs {
    /// Input CSV file
    file: PathBuf,
    /// Model to fit
    #[arg(long, default_value = "gmol")]
    model: String,
    /// Optional starting point alpha,lambda,tau,beta
    #[arg(long)]
    init: Option<String>,
    /// Seed for the optimizer's restart jitter
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RegressArgs {
    /// Input CSV file
    file: PathBuf,
    /// Model to fit
    #[arg(long, default_value = "gmol")]
    model: String,
    /// Comma-separated covariate column names (intercept is implicit)
    #[arg(long, value_delimiter = ',')]
    covariates: Vec<String>,
    /// Optional starting point alpha,lambda,eta1...,eta2...
    #[arg(long)]
    init: Option<String>,
    /// Seed for the optimizer's restart jitter
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SimulateArgs {
    /// Study design
    #[arg(long)]
    design: String,
    /// True parameters: alpha,lambda,tau,beta (iid) or
    /// alpha,lambda,eta10,eta11,eta20,eta21 (regression)
    #[arg(long)]
    truth: String,
    /// Comma-separated sample sizes
    #[arg(long = "n-list", value_delimiter = ',')]
    n_list: Vec<usize>,
    /// Monte Carlo replicates per cell
    #[arg(long)]
    reps: usize,
    /// Target censoring fractions (regression design only)
    #[arg(long, value_delimiter = ',')]
    censoring: Vec<f64>,
    /// Study seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CurveArgs {
    /// Which curve to tabulate
    #[arg(long)]
    what: String,
    /// Parameters alpha,lambda,tau,beta
    #[arg(long)]
    params: String,
    /// Grid specification min:max:points
    #[arg(long)]
    grid: String,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    configure_threads();

    let outcome = match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Regress(args) => cmd_regress(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Curve(args) => cmd_curve(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::NonConvergence(_) => 2,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

// GMOL_THREADS caps the parallelism used by the simulate engine.
fn configure_threads() {
    if let Ok(raw) = std::env::var("GMOL_THREADS") {
        if let Ok(n) = raw.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn parse_floats(raw: &str, what: &str) -> Result<Vec<f64>, Error> {
    raw.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Domain(format!("cannot parse '{p}' in {what}")))
        })
        .collect()
}

fn parse_theta(raw: &str) -> Result<GmolParams, Error> {
    let v = parse_floats(raw, "--params/--init")?;
    if v.len() != 4 {
        return Err(Error::Domain(format!(
            "expected 4 values alpha,lambda,tau,beta, got {}",
            v.len()
        )));
    }
    GmolParams::new(v[0], v[1], v[2], v[3])
}

fn parse_model(raw: &str) -> Result<SubModel, Error> {
    raw.parse::<SubModel>()
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("output");
    path.with_file_name(format!("{stem}.{suffix}.csv"))
}

fn opts_with_seed(seed: u64) -> FitOptions {
    FitOptions {
        optimizer: OptimizerConfig { jitter_seed: seed, ..Default::default() },
    }
}

fn fmt_or_dash(v: Option<f64>) -> String {
    match v {
        Some(v) => fmt_human(v),
        None => "-".to_string(),
    }
}

fn cmd_fit(args: FitArgs) -> Result<ExitCode, Error> {
    let model = parse_model(&args.model)?;
    let sample = read_iid_csv(&args.file)?;
    let init = args.init.as_deref().map(parse_theta).transpose()?;
    let fit = fit_mle_with(&sample, model, init, &opts_with_seed(args.seed))?;
    let gof = gof_stats(&fit, &sample);

    println!("model: {}   n: {}", args.model.to_lowercase(), fit.n);
    println!("{:<10} {:>12} {:>12}", "parameter", "estimate", "se");
    let names = fit.model.param_names();
    let estimates: Vec<f64> = match fit.model {
        SubModel::Gmol => fit.theta_hat.as_array().to_vec(),
        SubModel::Mol => vec![fit.theta_hat.alpha(), fit.theta_hat.tau(), fit.theta_hat.beta()],
        SubModel::Lomax => vec![fit.theta_hat.tau(), fit.theta_hat.beta()],
    };
    for (i, name) in names.iter().enumerate() {
        let se = fit.se.as_ref().map(|s| s[i]);
        println!(
            "{:<10} {:>12} {:>12}",
            name,
            fmt_human(estimates[i]),
            fmt_or_dash(se)
        );
    }
    println!("loglik: {}", fmt_human(fit.loglik));

    let mut rows: Vec<(String, f64)> = names
        .iter()
        .zip(&estimates)
        .map(|(n, e)| (n.to_string(), *e))
        .collect();
    if let Some(se) = &fit.se {
        for (name, s) in names.iter().zip(se) {
            rows.push((format!("se_{name}"), *s));
        }
    }
    rows.push(("loglik".into(), fit.loglik));
    rows.push(("n".into(), fit.n as f64));
    rows.push(("converged".into(), if fit.converged { 1.0 } else { 0.0 }));

    match gof {
        Ok(g) => {
            println!(
                "W*: {}   A*: {}   KS: {}   p: {}",
                fmt_human(g.w_star),
                fmt_human(g.a_star),
                fmt_human(g.ks),
                fmt_human(g.ks_p)
            );
            println!(
                "AIC: {}   CAIC: {}   BIC: {}   HQIC: {}",
                fmt_human(g.aic),
                fmt_human(g.caic),
                fmt_human(g.bic),
                fmt_human(g.hqic)
            );
            rows.extend([
                ("w_star".to_string(), g.w_star),
                ("a_star".to_string(), g.a_star),
                ("ks".to_string(), g.ks),
                ("ks_p".to_string(), g.ks_p),
                ("aic".to_string(), g.aic),
                ("caic".to_string(), g.caic),
                ("bic".to_string(), g.bic),
                ("hqic".to_string(), g.hqic),
            ]);
        }
        Err(e) => eprintln!("goodness-of-fit skipped: {e}"),
    }

    let out = sidecar(&args.file, "fit");
    write_named_csv(&out, &rows)?;
    println!("wrote {}", out.display());

    if fit.converged {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("warning: optimizer did not meet its tolerances");
        Ok(ExitCode::from(2))
    }
}

fn build_design(args: &RegressArgs) -> Result<CensoredDesign, Error> {
    let table = read_censored_csv(&args.file)?;
    let mut columns: Vec<&Vec<f64>> = Vec::new();
    for want in &args.covariates {
        let idx = table
            .covariate_names
            .iter()
            .position(|n| n == want)
            .ok_or_else(|| {
                Error::Design(format!(
                    "unknown covariate '{want}'; available columns: {}",
                    table.covariate_names.join(", ")
                ))
            })?;
        columns.push(&table.covariates[idx]);
    }
    let n = table.time.len();
    let r = 1 + columns.len();
    let v = DMatrix::from_fn(n, r, |i, j| if j == 0 { 1.0 } else { columns[j - 1][i] });
    CensoredDesign::new(table.time, table.status, v)
}

fn parse_zeta(raw: &str, r: usize) -> Result<RegParams, Error> {
    let v = parse_floats(raw, "--init")?;
    if v.len() != 2 + 2 * r {
        return Err(Error::Domain(format!(
            "expected {} values alpha,lambda,eta1..,eta2.., got {}",
            2 + 2 * r,
            v.len()
        )));
    }
    RegParams::new(v[0], v[1], v[2..2 + r].to_vec(), v[2 + r..].to_vec())
}

fn cmd_regress(args: RegressArgs) -> Result<ExitCode, Error> {
    let model = parse_model(&args.model)?;
    let design = build_design(&args)?;
    let r = design.covariate_count();
    let init = args.init.as_deref().map(|raw| parse_zeta(raw, r)).transpose()?;
    let opts = opts_with_seed(args.seed);
    let fit = fit_regression_with(&design, model, init, &opts)?;

    println!(
        "model: {}   n: {}   failures: {}",
        args.model.to_lowercase(),
        design.len(),
        design.failures()
    );
    println!(
        "{:<10} {:>12} {:>12} {:>12}",
        "parameter", "estimate", "se", "p-value"
    );
    let names = fit.zeta_hat.param_names();
    let values = fit.zeta_hat.as_vec();
    let skip = match model {
        SubModel::Gmol => 0,
        SubModel::Mol => 1,
        SubModel::Lomax => 2,
    };
    let free_offset = match model {
        SubModel::Gmol => 2,
        SubModel::Mol => 1,
        SubModel::Lomax => 0,
    };
    let mut machine: Vec<(String, f64)> = Vec::new();
    for (i, name) in names.iter().enumerate().skip(skip) {
        // the generator parameters are reported without p-values
        let se_idx = i - skip;
        let se = fit.se.as_ref().map(|s| s[se_idx]);
        let p = if se_idx >= free_offset {
            fit.wald_p.as_ref().map(|w| w[se_idx - free_offset])
        } else {
            None
        };
        println!(
            "{:<10} {:>12} {:>12} {:>12}",
            name,
            fmt_human(values[i]),
            fmt_or_dash(se),
            fmt_or_dash(p)
        );
        machine.push((name.clone(), values[i]));
        if let Some(s) = se {
            machine.push((format!("se_{name}"), s));
        }
        if let Some(p) = p {
            machine.push((format!("p_{name}"), p));
        }
    }
    println!("loglik: {}", fmt_human(fit.loglik));
    machine.push(("loglik".into(), fit.loglik));

    // likelihood-ratio tests against the nested sub-models
    let nested: &[(SubModel, &str, u32)] = match model {
        SubModel::Gmol => &[
            (SubModel::Mol, "gmol vs mol (H0: lambda = 1)", 1),
            (SubModel::Lomax, "gmol vs lomax (H0: alpha = lambda = 1)", 2),
        ],
        SubModel::Mol => &[(SubModel::Lomax, "mol vs lomax (H0: alpha = 1)", 1)],
        SubModel::Lomax => &[],
    };
    if !nested.is_empty() {
        println!("{:<40} {:>10} {:>10}", "LR test", "statistic", "p-value");
        for (sub, label, df) in nested {
            let sub_fit = fit_regression_with(&design, *sub, None, &opts)?;
            let (stat, p) = lr_test(&fit, &sub_fit, *df)?;
            println!("{:<40} {:>10} {:>10}", label, fmt_human(stat), fmt_human(p));
            machine.push((format!("lr_stat_df{df}"), stat));
            machine.push((format!("lr_p_df{df}"), p));
        }
    }

    let residuals = quantile_residuals(&fit, &design)?;
    let res_path = sidecar(&args.file, "residuals");
    write_residuals_csv(&res_path, &residuals)?;
    let fit_path = sidecar(&args.file, "regfit");
    write_named_csv(&fit_path, &machine)?;
    println!("wrote {} and {}", fit_path.display(), res_path.display());

    if fit.converged {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("warning: optimizer did not meet its tolerances");
        Ok(ExitCode::from(2))
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode, Error> {
    if args.reps == 0 {
        return Err(Error::Domain("--reps must be at least 1".into()));
    }
    let truth_vals = parse_floats(&args.truth, "--truth")?;
    let table = match args.design.to_ascii_lowercase().as_str() {
        "iid" => {
            if truth_vals.len() != 4 {
                return Err(Error::Domain(format!(
                    "iid design needs 4 truth values, got {}",
                    truth_vals.len()
                )));
            }
            if !args.censoring.is_empty() {
                return Err(Error::Domain(
                    "--censoring applies to the regression design only".into(),
                ));
            }
            let cfg = StudyConfig {
                truth: StudyTruth::Iid(GmolParams::new(
                    truth_vals[0],
                    truth_vals[1],
                    truth_vals[2],
                    truth_vals[3],
                )?),
                n_list: args.n_list.clone(),
                reps: args.reps,
                seed: args.seed,
                censor_targets: vec![],
            };
            run_iid_study(&cfg)?
        }
        "regression" => {
            if truth_vals.len() != 6 {
                return Err(Error::Domain(format!(
                    "regression design needs 6 truth values alpha,lambda,eta10,eta11,eta20,eta21, got {}",
                    truth_vals.len()
                )));
            }
            let zeta = RegParams::new(
                truth_vals[0],
                truth_vals[1],
                vec![truth_vals[2], truth_vals[3]],
                vec![truth_vals[4], truth_vals[5]],
            )?;
            let cfg = StudyConfig {
                truth: StudyTruth::Regression(zeta),
                n_list: args.n_list.clone(),
                reps: args.reps,
                seed: args.seed,
                censor_targets: args.censoring.clone(),
            };
            run_regression_study(&cfg)?
        }
        other => {
            return Err(Error::Domain(format!(
                "unknown design '{other}' (expected iid or regression)"
            )))
        }
    };
    for w in &table.warnings {
        eprintln!("warning: {w}");
    }
    write_study_csv(&args.out, &table)?;
    println!("wrote {} ({} rows)", args.out.display(), table.rows.len());
    Ok(ExitCode::SUCCESS)
}

fn parse_grid(raw: &str) -> Result<(f64, f64, usize), Error> {
    let parts: Vec<&str> = raw.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Domain(format!("grid must be min:max:points, got '{raw}'")));
    }
    let min: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| Error::Domain(format!("bad grid minimum '{}'", parts[0])))?;
    let max: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::Domain(format!("bad grid maximum '{}'", parts[1])))?;
    let points: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| Error::Domain(format!("bad grid point count '{}'", parts[2])))?;
    if !(max > min) || points < 2 {
        return Err(Error::Domain(
            "grid needs max > min and at least 2 points".into(),
        ));
    }
    Ok((min, max, points))
}

fn cmd_curve(args: CurveArgs) -> Result<ExitCode, Error> {
    let theta = parse_theta(&args.params)?;
    let (min, max, points) = parse_grid(&args.grid)?;
    let grid: Vec<f64> = (0..points)
        .map(|i| min + (max - min) * i as f64 / (points - 1) as f64)
        .collect();

    let what = args.what.to_ascii_lowercase();
    let on_unit = matches!(what.as_str(), "quantile" | "lorenz" | "bonferroni");
    if on_unit && (min <= 0.0 || max >= 1.0) {
        return Err(Error::Domain(format!(
            "{what} grids must stay strictly inside (0, 1)"
        )));
    }
    if !on_unit && min < 0.0 {
        return Err(Error::Domain(format!("{what} grids require x >= 0")));
    }

    let mut rows = Vec::with_capacity(points);
    for &t in &grid {
        let value = match what.as_str() {
            "pdf" => theta.pdf(t)?,
            "cdf" => theta.cdf(t)?,
            "hrf" => theta.hrf(t)?,
            "quantile" => theta.quantile(t)?,
            "lorenz" => gmol::lorenz(t, &theta)?,
            "bonferroni" => gmol::bonferroni(t, &theta)?,
            other => {
                return Err(Error::Domain(format!(
                    "unknown curve '{other}' (expected pdf, cdf, hrf, quantile, lorenz or bonferroni)"
                )))
            }
        };
        rows.push((t, value));
    }
    let header = if on_unit { ("u", "value") } else { ("x", "value") };
    write_pairs_csv(&args.out, header, &rows)?;
    println!("wrote {} ({} rows)", args.out.display(), rows.len());
    Ok(ExitCode::SUCCESS)
}
