//! End-to-end tests of the command-line tool: exit codes, file contracts,
//! reproducibility.

mod common;

use gmol::csvio::read_table;
use gmol::regress::RegParams;
use gmol::GmolParams;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_gmol")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn named_value(path: &Path, name: &str) -> f64 {
    let content = std::fs::read_to_string(path).unwrap();
    for line in content.lines().skip(1) {
        let mut parts = line.splitn(2, ',');
        if parts.next() == Some(name) {
            return parts.next().unwrap().parse().unwrap();
        }
    }
    panic!("{name} not found in {}", path.display());
}

fn write_iid_fixture(dir: &Path, n: usize, seed: u64) -> PathBuf {
    let theta = GmolParams::new(1.0, 1.0, 2.0, 1.0).unwrap();
    let xs = theta.sample(n, seed);
    let mut body = String::from("time\n");
    for x in xs {
        body.push_str(&format!("{x:.12e}\n"));
    }
    let path = dir.join("iid.csv");
    std::fs::write(&path, body).unwrap();
    path
}

fn write_censored_fixture(dir: &Path, n: usize, seed: u64) -> PathBuf {
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    let zeta = RegParams::new(0.5, 0.3, vec![0.6, 0.8], vec![0.2, 0.4]).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let unit = |rng: &mut rand_chacha::ChaCha8Rng| loop {
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        if u > 0.0 {
            break u;
        }
    };
    let mut body = String::from("time,status,v1\n");
    for _ in 0..n {
        let v1 = unit(&mut rng);
        let (beta_i, tau_i) = gmol::systematic_components(&zeta, &[1.0, v1]).unwrap();
        let th = GmolParams::new(0.5, 0.3, tau_i, beta_i).unwrap();
        let life = th.quantile(unit(&mut rng)).unwrap();
        let c = 12.0 * unit(&mut rng);
        let (x, d) = if life <= c { (life, 1) } else { (c, 0) };
        body.push_str(&format!("{x:.12e},{d},{v1:.12e}\n"));
    }
    let path = dir.join("censored.csv");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn fit_recovers_and_respects_nesting() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_iid_fixture(dir.path(), 400, 5);

    let out = run(&[
        "fit",
        file.to_str().unwrap(),
        "--model",
        "lomax",
        "--seed",
        "3",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let sidecar = dir.path().join("iid.fit.csv");
    assert!(sidecar.exists());
    let tau = named_value(&sidecar, "tau");
    let se_tau = named_value(&sidecar, "se_tau");
    let beta = named_value(&sidecar, "beta");
    let se_beta = named_value(&sidecar, "se_beta");
    assert!((tau - 2.0).abs() < 3.0 * se_tau, "tau {tau} se {se_tau}");
    assert!((beta - 1.0).abs() < 3.0 * se_beta, "beta {beta} se {se_beta}");
    let lomax_ll = named_value(&sidecar, "loglik");

    let out = run(&["fit", file.to_str().unwrap(), "--model", "gmol"]);
    assert_eq!(code(&out), 0);
    let gmol_ll = named_value(&sidecar, "loglik");
    assert!(gmol_ll >= lomax_ll - 1e-6, "gmol {gmol_ll} < lomax {lomax_ll}");
}

#[test]
fn fit_input_errors() {
    let out = run(&["fit", "/nonexistent/data.csv", "--model", "lomax"]);
    assert_eq!(code(&out), 1);
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("/nonexistent/data.csv"),
        "error message names the path"
    );

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "time\n1.5\nnot_a_number\n").unwrap();
    let out = run(&["fit", bad.to_str().unwrap(), "--model", "lomax"]);
    assert_eq!(code(&out), 1);
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("line 3"),
        "error carries the line number: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    let file = write_iid_fixture(dir.path(), 30, 1);
    let out = run(&["fit", file.to_str().unwrap(), "--model", "weibull"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn regress_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_censored_fixture(dir.path(), 250, 21);

    let out = run(&[
        "regress",
        file.to_str().unwrap(),
        "--model",
        "gmol",
        "--covariates",
        "v1",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("eta11"), "table lists coefficients: {stdout}");
    assert!(stdout.contains("LR test"), "LR tests printed");

    let res_path = dir.path().join("censored.residuals.csv");
    let (headers, cols) = read_table(&res_path).unwrap();
    assert_eq!(headers, vec!["index", "qr", "status"]);
    assert_eq!(cols[0].len(), 250);
    assert!(cols[1].iter().all(|v| v.is_finite()));
    assert!(cols[2].iter().all(|v| *v == 0.0 || *v == 1.0));

    let fit_path = dir.path().join("censored.regfit.csv");
    let p1 = named_value(&fit_path, "lr_p_df1");
    let p2 = named_value(&fit_path, "lr_p_df2");
    assert!((0.0..=1.0).contains(&p1));
    assert!((0.0..=1.0).contains(&p2));
}

#[test]
fn regress_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_censored_fixture(dir.path(), 60, 8);
    let out = run(&[
        "regress",
        file.to_str().unwrap(),
        "--model",
        "gmol",
        "--covariates",
        "age",
    ]);
    assert_eq!(code(&out), 1);
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("v1"), "lists available columns: {msg}");

    // all-censored data cannot identify anything
    let all_censored = dir.path().join("allcens.csv");
    std::fs::write(&all_censored, "time,status,v1\n1.0,0,0.5\n2.0,0,0.7\n3.0,0,0.2\n")
        .unwrap();
    let out = run(&[
        "regress",
        all_censored.to_str().unwrap(),
        "--model",
        "lomax",
        "--covariates",
        "v1",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn simulate_writes_deterministic_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("study_a.csv");
    let out_b = dir.path().join("study_b.csv");
    let args = |out: &Path| {
        vec![
            "simulate".to_string(),
            "--design".into(),
            "iid".into(),
            "--truth".into(),
            "0.2,0.6,0.5,0.8".into(),
            "--n-list".into(),
            "30,60".into(),
            "--reps".into(),
            "4".into(),
            "--seed".into(),
            "42".into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ]
    };
    let run_vec = |args: Vec<String>| {
        Command::new(bin())
            .args(&args)
            .output()
            .expect("binary runs")
    };
    assert_eq!(code(&run_vec(args(&out_a))), 0);
    assert_eq!(code(&run_vec(args(&out_b))), 0);
    let bytes_a = std::fs::read(&out_a).unwrap();
    let bytes_b = std::fs::read(&out_b).unwrap();
    assert_eq!(bytes_a, bytes_b, "same seed must be byte-identical");

    let (headers, cols) = read_table(&out_a).unwrap();
    assert_eq!(headers, vec!["param", "n", "censoring", "AE", "Bias", "MSE"]);
    assert_eq!(cols[0].len(), 8, "4 parameters x 2 sample sizes");

    // regression design shape: 6 params x 1 n x 2 censoring levels
    let out_c = dir.path().join("study_c.csv");
    let out = run(&[
        "simulate",
        "--design",
        "regression",
        "--truth",
        "0.5,0.3,0.6,0.8,0.2,0.4",
        "--n-list",
        "40",
        "--reps",
        "2",
        "--censoring",
        "0,0.3",
        "--seed",
        "7",
        "--out",
        out_c.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let (_, cols) = read_table(&out_c).unwrap();
    assert_eq!(cols[0].len(), 12);
}

#[test]
fn simulate_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("x.csv");
    let out = run(&[
        "simulate",
        "--design",
        "iid",
        "--truth",
        "0.2,0.6,0.5,0.8",
        "--n-list",
        "30",
        "--reps",
        "0",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);

    // wrong truth arity
    let out = run(&[
        "simulate",
        "--design",
        "iid",
        "--truth",
        "0.2,0.6,0.5",
        "--n-list",
        "30",
        "--reps",
        "2",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);

    // censoring flag belongs to the regression design
    let out = run(&[
        "simulate",
        "--design",
        "iid",
        "--truth",
        "0.2,0.6,0.5,0.8",
        "--n-list",
        "30",
        "--reps",
        "2",
        "--censoring",
        "0.1",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn curve_tables() {
    let dir = tempfile::tempdir().unwrap();
    let pdf_path = dir.path().join("pdf.csv");
    let out = run(&[
        "curve",
        "--what",
        "pdf",
        "--params",
        "0.2,0.6,0.5,0.8",
        "--grid",
        "0:20:4001",
        "--out",
        pdf_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let (_, cols) = read_table(&pdf_path).unwrap();
    let theta = GmolParams::new(0.2, 0.6, 0.5, 0.8).unwrap();
    // trapezoid integral of the pdf table matches the cdf increment
    let xs = &cols[0];
    let ys = &cols[1];
    let mut integral = 0.0;
    for i in 1..xs.len() {
        integral += 0.5 * (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1]);
    }
    let expect = theta.cdf(20.0).unwrap() - theta.cdf(0.0).unwrap();
    assert!(
        (integral - expect).abs() < 1e-3,
        "trapezoid {integral} vs cdf increment {expect}"
    );

    let cdf_path = dir.path().join("cdf.csv");
    let out = run(&[
        "curve",
        "--what",
        "cdf",
        "--params",
        "0.2,0.6,0.5,0.8",
        "--grid",
        "0:50:200",
        "--out",
        cdf_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let (_, cols) = read_table(&cdf_path).unwrap();
    let first = cols[1][0];
    let last = *cols[1].last().unwrap();
    assert!(first.abs() < 1e-12);
    assert!(cols[1].iter().all(|v| *v <= last + 1e-15));

    // Lorenz sits below the diagonal for the published curve setting
    let lorenz_path = dir.path().join("lorenz.csv");
    let out = run(&[
        "curve",
        "--what",
        "lorenz",
        "--params",
        "1.0,1.0,6.0,2.0",
        "--grid",
        "0.01:0.99:99",
        "--out",
        lorenz_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let (_, cols) = read_table(&lorenz_path).unwrap();
    for (nu, l) in cols[0].iter().zip(&cols[1]) {
        assert!(*l <= *nu + 1e-12, "Lorenz above diagonal at {nu}");
    }

    // unit-interval grids must not touch the endpoints
    let out = run(&[
        "curve",
        "--what",
        "quantile",
        "--params",
        "0.2,0.6,0.5,0.8",
        "--grid",
        "0:0.99:10",
        "--out",
        dir.path().join("q.csv").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn written_csv_round_trips_through_reader() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_iid_fixture(dir.path(), 120, 33);
    let out = run_in(dir.path(), &["fit", file.to_str().unwrap(), "--model", "lomax"]);
    assert_eq!(code(&out), 0);
    let sidecar = dir.path().join("iid.fit.csv");
    let (headers, cols) = read_table(&sidecar).unwrap();
    assert_eq!(headers, vec!["name", "value"]);
    // 12-significant-digit round trip: re-reading reproduces the values
    let content = std::fs::read_to_string(&sidecar).unwrap();
    for (line, value) in content.lines().skip(1).zip(&cols[1]) {
        let raw = line.split(',').nth(1).unwrap();
        let reparsed: f64 = raw.parse().unwrap();
        assert_eq!(reparsed, *value);
    }
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("simulate"));
}
