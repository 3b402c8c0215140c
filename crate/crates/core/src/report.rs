//! CSV and JSON serialisation of mean-value reports.
//!
//! Both formats carry the same twelve fields per row. CSV floats are written
//! with 15 significant digits; JSON keeps full `f64` precision. A missing
//! value (an oracle that is not defined for the target, or a `k` that does
//! not apply) is an empty CSV field and a JSON `null`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meanval::{MeanValueReport, PowerFit, ResidualSeries, SkippedModulus};

pub const CSV_HEADER: [&str; 12] = [
    "target",
    "q",
    "a_num",
    "a_den",
    "k",
    "lhs_re",
    "lhs_im",
    "paper_main",
    "oracle_main",
    "residual",
    "normalized_residual",
    "route_agreement",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Ok(Format::Csv),
            Some(e) if e.eq_ignore_ascii_case("json") => Ok(Format::Json),
            _ => Err(Error::InvalidArgument(format!(
                "cannot infer output format from {}; use .csv or .json",
                path.display()
            ))),
        }
    }
}

/// One output row, in column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub target: String,
    pub q: u64,
    pub a_num: u64,
    pub a_den: u64,
    pub k: Option<u64>,
    pub lhs_re: f64,
    pub lhs_im: f64,
    pub paper_main: f64,
    pub oracle_main: Option<f64>,
    pub residual: f64,
    pub normalized_residual: f64,
    pub route_agreement: f64,
}

impl From<&MeanValueReport> for ReportRow {
    fn from(r: &MeanValueReport) -> Self {
        Self {
            target: r.query.target.to_string(),
            q: r.query.modulus,
            a_num: r.query.a.numerator(),
            a_den: r.query.a.denominator(),
            k: r.query.k_column(),
            lhs_re: r.lhs.re,
            lhs_im: r.lhs.im,
            paper_main: r.paper_main,
            oracle_main: r.oracle_main,
            residual: r.residual,
            normalized_residual: r.normalized_residual,
            route_agreement: r.route_agreement,
        }
    }
}

/// 15 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.14e}")
}

fn csv_record(row: &ReportRow) -> [String; 12] {
    let opt = |v: Option<String>| v.unwrap_or_default();
    [
        row.target.clone(),
        row.q.to_string(),
        row.a_num.to_string(),
        row.a_den.to_string(),
        opt(row.k.map(|k| k.to_string())),
        format_float(row.lhs_re),
        format_float(row.lhs_im),
        format_float(row.paper_main),
        opt(row.oracle_main.map(format_float)),
        format_float(row.residual),
        format_float(row.normalized_residual),
        format_float(row.route_agreement),
    ]
}

pub fn write_csv<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(csv_record(row))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        return Err(Error::InvalidArgument(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// JSON document for a sweep: the rows plus the series summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesDocument {
    pub target: String,
    pub rows: Vec<ReportRow>,
    pub fit: Option<FitSummary>,
    pub max_abs_normalized: f64,
    pub tension_moduli: Vec<u64>,
    pub skipped: Vec<SkippedEntry>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub exponent: f64,
    pub constant: f64,
    pub points: usize,
}

impl From<PowerFit> for FitSummary {
    fn from(f: PowerFit) -> Self {
        Self {
            exponent: f.exponent,
            constant: f.constant,
            points: f.points,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedEntry {
    pub modulus: u64,
    pub reason: String,
}

impl From<&SkippedModulus> for SkippedEntry {
    fn from(s: &SkippedModulus) -> Self {
        Self {
            modulus: s.modulus,
            reason: s.reason.clone(),
        }
    }
}

impl From<&ResidualSeries> for SeriesDocument {
    fn from(s: &ResidualSeries) -> Self {
        Self {
            target: s.target.to_string(),
            rows: s.reports.iter().map(ReportRow::from).collect(),
            fit: s.fit.map(FitSummary::from),
            max_abs_normalized: s.max_abs_normalized,
            tension_moduli: s.tension_moduli.clone(),
            skipped: s.skipped.iter().map(SkippedEntry::from).collect(),
        }
    }
}

pub fn write_json<W: Write>(doc: &SeriesDocument, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, doc)?;
    writeln!(out)?;
    Ok(())
}

/// Writes a series to `path`, choosing the format by extension.
pub fn emit_series(series: &ResidualSeries, path: &Path) -> Result<()> {
    let format = Format::from_path(path)?;
    let mut out = BufWriter::new(File::create(path)?);
    match format {
        Format::Csv => {
            let rows: Vec<ReportRow> = series.reports.iter().map(ReportRow::from).collect();
            write_csv(&rows, &mut out)?;
        }
        Format::Json => write_json(&SeriesDocument::from(series), &mut out)?,
    }
    out.flush()?;
    Ok(())
}

/// Writes a single report to `path`.
pub fn emit_report(report: &MeanValueReport, path: &Path) -> Result<()> {
    let format = Format::from_path(path)?;
    let mut out = BufWriter::new(File::create(path)?);
    let row = ReportRow::from(report);
    match format {
        Format::Csv => write_csv(std::slice::from_ref(&row), &mut out)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &row)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}
