//! CSV ingestion and emission.
//!
//! Format contract: header row, comma separator, '.' decimal, UTF-8, LF
//! endings. Machine-readable numbers carry 12 significant digits so files
//! round-trip through the reader with identical values.

use crate::error::{Error, Result};
use crate::fit::IidSample;
use crate::study::StudyTable;
use std::io::Write;
use std::path::Path;

/// Render a value with 12 significant digits.
pub fn fmt_machine(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else {
        format!("{v}")
    }
}

/// Render a value the way the human-facing tables do (4 decimals).
pub fn fmt_human(v: f64) -> String {
    format!("{v:.4}")
}

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Design(format!("cannot open {}: {e}", path.display())))?;
    Ok(csv::ReaderBuilder::new().has_headers(true).from_reader(file))
}

fn parse_field(raw: &str, line: usize, column: &str) -> Result<f64> {
    raw.trim().parse::<f64>().map_err(|_| {
        Error::Design(format!("line {line}: cannot parse '{raw}' in column '{column}'"))
    })
}

/// A parsed censored dataset: times, status indicators and named numeric
/// covariate columns.
#[derive(Debug, Clone)]
pub struct CensoredTable {
    pub time: Vec<f64>,
    pub status: Vec<u8>,
    pub covariate_names: Vec<String>,
    /// One vector per covariate name, aligned with `time`.
    pub covariates: Vec<Vec<f64>>,
}

/// Read an iid dataset: a single column named `time`.
pub fn read_iid_csv(path: &Path) -> Result<IidSample> {
    let mut reader = open_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Design(format!("{}: bad header: {e}", path.display())))?
        .clone();
    let time_idx = headers
        .iter()
        .position(|h| h.trim() == "time")
        .ok_or_else(|| Error::Design(format!("{}: no 'time' column", path.display())))?;
    let mut x = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record =
            record.map_err(|e| Error::Design(format!("line {line}: malformed row: {e}")))?;
        let raw = record
            .get(time_idx)
            .ok_or_else(|| Error::Design(format!("line {line}: missing time field")))?;
        let t = parse_field(raw, line, "time")?;
        if !(t > 0.0) {
            return Err(Error::Design(format!(
                "line {line}: times must be strictly positive, got {t}"
            )));
        }
        x.push(t);
    }
    IidSample::new(x)
}

/// Read a censored dataset: columns `time`, `status` (0/1) and any number
/// of numeric covariate columns.
pub fn read_censored_csv(path: &Path) -> Result<CensoredTable> {
    let mut reader = open_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Design(format!("{}: bad header: {e}", path.display())))?
        .clone();
    let names: Vec<String> = headers.iter().map(|h| h.trim().to_string()).collect();
    let time_idx = names
        .iter()
        .position(|h| h == "time")
        .ok_or_else(|| Error::Design(format!("{}: no 'time' column", path.display())))?;
    let status_idx = names
        .iter()
        .position(|h| h == "status")
        .ok_or_else(|| Error::Design(format!("{}: no 'status' column", path.display())))?;
    let cov_idx: Vec<usize> = (0..names.len())
        .filter(|i| *i != time_idx && *i != status_idx)
        .collect();

    let mut table = CensoredTable {
        time: Vec::new(),
        status: Vec::new(),
        covariate_names: cov_idx.iter().map(|i| names[*i].clone()).collect(),
        covariates: vec![Vec::new(); cov_idx.len()],
    };
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record =
            record.map_err(|e| Error::Design(format!("line {line}: malformed row: {e}")))?;
        let t = parse_field(
            record
                .get(time_idx)
                .ok_or_else(|| Error::Design(format!("line {line}: missing time field")))?,
            line,
            "time",
        )?;
        if !(t > 0.0) {
            return Err(Error::Design(format!(
                "line {line}: times must be strictly positive, got {t}"
            )));
        }
        let s = parse_field(
            record
                .get(status_idx)
                .ok_or_else(|| Error::Design(format!("line {line}: missing status field")))?,
            line,
            "status",
        )?;
        if s != 0.0 && s != 1.0 {
            return Err(Error::Design(format!(
                "line {line}: status must be 0 or 1, got {s}"
            )));
        }
        table.time.push(t);
        table.status.push(s as u8);
        for (slot, idx) in cov_idx.iter().enumerate() {
            let raw = record
                .get(*idx)
                .ok_or_else(|| Error::Design(format!("line {line}: missing covariate field")))?;
            table.covariates[slot].push(parse_field(raw, line, &names[*idx])?);
        }
    }
    if table.time.is_empty() {
        return Err(Error::Design(format!("{}: no data rows", path.display())));
    }
    Ok(table)
}

fn create(path: &Path) -> Result<std::fs::File> {
    std::fs::File::create(path)
        .map_err(|e| Error::Design(format!("cannot write {}: {e}", path.display())))
}

/// Write a two-column table (header + machine-precision values).
pub fn write_pairs_csv(path: &Path, header: (&str, &str), rows: &[(f64, f64)]) -> Result<()> {
    let mut f = create(path)?;
    let mut out = format!("{},{}\n", header.0, header.1);
    for (a, b) in rows {
        out.push_str(&format!("{},{}\n", fmt_machine(*a), fmt_machine(*b)));
    }
    f.write_all(out.as_bytes())
        .map_err(|e| Error::Design(format!("write failed: {e}")))
}

/// Write name/value rows (fit reports).
pub fn write_named_csv(path: &Path, rows: &[(String, f64)]) -> Result<()> {
    let mut f = create(path)?;
    let mut out = String::from("name,value\n");
    for (name, v) in rows {
        out.push_str(&format!("{name},{}\n", fmt_machine(*v)));
    }
    f.write_all(out.as_bytes())
        .map_err(|e| Error::Design(format!("write failed: {e}")))
}

/// Write quantile residuals as (index, qr, status).
pub fn write_residuals_csv(path: &Path, residuals: &[(f64, u8)]) -> Result<()> {
    let mut f = create(path)?;
    let mut out = String::from("index,qr,status\n");
    for (i, (qr, status)) in residuals.iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", i + 1, fmt_machine(*qr), status));
    }
    f.write_all(out.as_bytes())
        .map_err(|e| Error::Design(format!("write failed: {e}")))
}

/// Write a study table with the CSV schema param,n,censoring,AE,Bias,MSE.
pub fn write_study_csv(path: &Path, table: &StudyTable) -> Result<()> {
    let mut f = create(path)?;
    let mut out = String::from("param,n,censoring,AE,Bias,MSE\n");
    for row in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.param,
            row.n,
            fmt_machine(row.censoring),
            fmt_machine(row.ae),
            fmt_machine(row.bias),
            fmt_machine(row.mse),
        ));
    }
    f.write_all(out.as_bytes())
        .map_err(|e| Error::Design(format!("write failed: {e}")))
}

/// Re-read any CSV written by this module as headers plus numeric columns
/// (non-numeric cells come back as NaN).
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut reader = open_reader(path)?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Design(format!("bad header: {e}")))?
        .iter()
        .map(|h| h.to_string())
        .collect();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    for record in reader.records() {
        let record = record.map_err(|e| Error::Design(format!("malformed row: {e}")))?;
        for (i, field) in record.iter().enumerate() {
            columns[i].push(field.trim().parse::<f64>().unwrap_or(f64::NAN));
        }
    }
    Ok((headers, columns))
}
