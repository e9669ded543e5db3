//! JSON reports and flat CSV tables.
//!
//! CSV floats are written as `{:.16e}` (17 significant digits), so a value read back
//! parses to the identical `f64`. Column sets are fixed per experiment; see
//! [`crate::catalog`] for their documentation.

use std::fs;
use std::path::{Path, PathBuf};

use heisqc_core::Point;
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result};

pub const REPORT_SCHEMA: u32 = 1;

/// One named threshold check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable bound, e.g. `"<= 1.05"`.
    pub bound: String,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, max: f64) -> Self {
        Check { name: name.into(), value, bound: format!("<= {max}"), pass: value <= max }
    }

    pub fn at_least(name: &str, value: f64, min: f64) -> Self {
        Check { name: name.into(), value, bound: format!(">= {min}"), pass: value >= min }
    }

    pub fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Check { name: name.into(), value, bound: format!("in [{lo}, {hi}]"), pass: value >= lo && value <= hi }
    }

    pub fn holds(name: &str, ok: bool) -> Self {
        Check { name: name.into(), value: if ok { 1.0 } else { 0.0 }, bound: "== 1".into(), pass: ok }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub op: String,
    pub seed: u64,
    pub inputs: Value,
    /// Headline number of the experiment (documented per experiment in the catalog).
    pub value: f64,
    pub std_error: Option<f64>,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub detail: Value,
}

/// A flat table of per-sample records.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Config(format!("csv encoding: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Config(format!("csv encoding: {e}")))
    }
}

/// 17 significant digits.
pub fn f(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn i(v: impl std::fmt::Display) -> String {
    v.to_string()
}

pub fn p3(p: Point) -> [String; 3] {
    [f(p.x), f(p.y), f(p.t)]
}

/// Writes `<stem>.json` and `<stem>.csv` into `dir`, returning both paths.
pub fn write_outputs(dir: &Path, stem: &str, report: &Report, table: &Table) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.into(), source })?;
    let json_path = dir.join(format!("{stem}.json"));
    let csv_path = dir.join(format!("{stem}.csv"));
    let mut json = serde_json::to_vec_pretty(report).map_err(|e| CliError::Config(format!("json encoding: {e}")))?;
    json.push(b'\n');
    fs::write(&json_path, json).map_err(|source| CliError::Io { path: json_path.clone(), source })?;
    fs::write(&csv_path, table.to_csv()?).map_err(|source| CliError::Io { path: csv_path.clone(), source })?;
    Ok((json_path, csv_path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_csv_text() {
        for v in [0.1, 1.0 / 3.0, 2.0f64.sqrt() * 1e-300, -12345.678901234567, f64::MIN_POSITIVE] {
            let s = f(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
            let digits = s.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).count();
            assert_eq!(digits, 17);
        }
    }

    #[test]
    fn table_header_first() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![f(1.0), i(2)]);
        let text = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(text, "a,b\n1.0000000000000000e0,2\n");
    }
}
