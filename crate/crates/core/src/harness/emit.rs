//! CSV and JSON output of experiment reports.
//!
//! CSV files carry one trajectory each with the header
//! `n,x,y,I1,I2_or_J,err_vs_oracle`; missing values are empty fields. A report
//! with a single run is written to the given path; with several runs, each
//! goes to `<stem>_<label>.csv` next to it.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::report::{ExperimentReport, RunRecord};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 6] = ["n", "x", "y", "I1", "I2_or_J", "err_vs_oracle"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format '{other}' (expected csv or json)"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::Serialization(format!("{}: {other:?}", path.display())),
    }
}

fn field(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// Writes one trajectory as CSV to `out`; `None` writes the header only.
pub fn write_csv<W: Write>(out: W, run: Option<&RunRecord>) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    if let Some(r) = run {
        for (s, e) in r.trajectory.samples.iter().zip(&r.err_vs_oracle) {
            w.write_record([
                s.n.to_string(),
                field(Some(s.x)),
                field(Some(s.y)),
                field(s.i1),
                field(s.i2_or_j),
                field(*e),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

/// Paths the CSV output of `report` goes to.
pub fn csv_paths(report: &ExperimentReport, path: &Path) -> Vec<PathBuf> {
    if report.runs.len() <= 1 {
        return vec![path.to_path_buf()];
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let dir = path.parent().unwrap_or_else(|| Path::new(""));
    report
        .runs
        .iter()
        .map(|r| dir.join(format!("{stem}_{}.csv", sanitize(&r.label))))
        .collect()
}

pub fn to_json(report: &ExperimentReport) -> Result<String> {
    serde_json::to_string_pretty(report).map_err(|e| Error::Serialization(e.to_string()))
}

pub fn from_json(text: &str) -> Result<ExperimentReport> {
    serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))
}

/// Writes `report` to `path` and returns the files written.
pub fn emit(report: &ExperimentReport, format: Format, path: &Path) -> Result<Vec<PathBuf>> {
    match format {
        Format::Json => {
            let text = to_json(report)?;
            let mut f = File::create(path).map_err(io_err(path))?;
            f.write_all(text.as_bytes()).map_err(io_err(path))?;
            f.write_all(b"\n").map_err(io_err(path))?;
            Ok(vec![path.to_path_buf()])
        }
        Format::Csv => {
            let paths = csv_paths(report, path);
            for (i, p) in paths.iter().enumerate() {
                let f = File::create(p).map_err(io_err(p))?;
                write_csv(BufWriter::new(f), report.runs.get(i)).map_err(|e| csv_err(p, e))?;
            }
            Ok(paths)
        }
    }
}
