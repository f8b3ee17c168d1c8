//! CSV schemas for sweep reports and decision-statistic dumps.
//!
//! Both are UTF-8, comma-delimited, with a header row. Floats use Rust's
//! shortest round-trip formatting, so reading a file back yields the exact
//! values that were written.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detectors::DetectorKind;
use crate::montecarlo::SweepAxis;
use crate::{Error, Result};

pub const SWEEP_HEADER: [&str; 6] = [
    "detector",
    "axis",
    "axis_value",
    "trials",
    "errors",
    "error_rate_percent",
];

pub const STATS_HEADER: [&str; 8] = [
    "sweep_value",
    "index",
    "lambda_corr",
    "delta_corr",
    "alpha_corr",
    "lambda_cov",
    "delta_cov",
    "alpha_cov",
];

/// One `(detector, axis value)` cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub detector: DetectorKind,
    pub axis: SweepAxis,
    pub axis_value: f64,
    pub trials: u64,
    pub errors: u64,
    pub error_rate_percent: f64,
}

impl ReportRow {
    pub fn successes(&self) -> u64 {
        self.trials - self.errors
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Parse("row with zero trials".into()));
        }
        if self.errors > self.trials {
            return Err(Error::Parse(format!(
                "errors ({}) exceed trials ({})",
                self.errors, self.trials
            )));
        }
        let expected = 100.0 * self.errors as f64 / self.trials as f64;
        if !(self.error_rate_percent - expected).abs().le(&1e-9) {
            return Err(Error::Parse(format!(
                "error_rate_percent {} inconsistent with {}/{}",
                self.error_rate_percent, self.errors, self.trials
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorRateReport {
    pub rows: Vec<ReportRow>,
}

impl ErrorRateReport {
    pub fn row(&self, detector: DetectorKind, axis_value: f64) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.detector == detector && r.axis_value == axis_value)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        if self.rows.is_empty() {
            w.write_record(SWEEP_HEADER)?;
        }
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Parse and validate a sweep CSV.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        check_header(r.headers()?, &SWEEP_HEADER)?;
        let mut rows = Vec::new();
        for row in r.deserialize::<ReportRow>() {
            let row = row?;
            row.validate()?;
            rows.push(row);
        }
        Ok(Self { rows })
    }
}

/// One eigenvalue index of a decision-statistic dump. Fields that are
/// undefined at small indices (`δ_1`, `α_1`, `α_2`) are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub sweep_value: f64,
    pub index: usize,
    pub lambda_corr: f64,
    pub delta_corr: Option<f64>,
    pub alpha_corr: Option<f64>,
    pub lambda_cov: f64,
    pub delta_cov: Option<f64>,
    pub alpha_cov: Option<f64>,
}

pub fn write_stats_csv<W: Write>(rows: &[StatsRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if rows.is_empty() {
        w.write_record(STATS_HEADER)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_stats_csv<R: Read>(reader: R) -> Result<Vec<StatsRow>> {
    let mut r = csv::Reader::from_reader(reader);
    check_header(r.headers()?, &STATS_HEADER)?;
    let mut rows = Vec::new();
    for row in r.deserialize::<StatsRow>() {
        let row: StatsRow = row?;
        if row.index == 0 {
            return Err(Error::Parse("stats index is 1-based".into()));
        }
        rows.push(row);
    }
    Ok(rows)
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    if found.iter().ne(expected.iter().copied()) {
        return Err(Error::Parse(format!(
            "unexpected header {:?}, expected {:?}",
            found.iter().collect::<Vec<_>>(),
            expected
        )));
    }
    Ok(())
}

/// Write `path` through a temporary file in the same directory, then
/// rename it into place.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let io_err = |source: io::Error| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => std::env::current_dir().map_err(io_err)?,
    };
    if path.is_dir() {
        return Err(io_err(io::Error::new(
            io::ErrorKind::IsADirectory,
            "output path is a directory",
        )));
    }
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err)?;
    {
        let mut buffered = io::BufWriter::new(tmp.as_file_mut());
        fill(&mut buffered)?;
        buffered.flush().map_err(io_err)?;
    }
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Read a whole file, mapping failures to an I/O error carrying the path.
pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
