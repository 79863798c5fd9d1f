//! CSV datasets and JSON metadata sidecars.
//!
//! Numbers are written in Rust's shortest round-trip form, one header row,
//! comma separated, LF line endings. Wall-clock time only ever appears in
//! the sidecar.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable that overrides the output directory.
pub const OUT_ENV: &str = "EWSPEC_OUT";

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(usize),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match cell {
                    Cell::Float(v) => write!(out, "{v:?}"),
                    Cell::Int(v) => write!(out, "{v}"),
                }
                .expect("writing to a String cannot fail");
            }
            out.push('\n');
        }
        out
    }

    /// Values of a float column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        self.rows
            .iter()
            .map(|r| match r[idx] {
                Cell::Float(v) => Some(v),
                Cell::Int(v) => Some(v as f64),
            })
            .collect()
    }
}

/// Wraps `body` with the crate version and a generation timestamp.
pub fn sidecar(body: Value) -> Value {
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut v = json!({
        "ewspec_version": VERSION,
        "generated_unix_seconds": stamp,
    });
    if let (Value::Object(dst), Value::Object(src)) = (&mut v, body) {
        dst.extend(src);
    }
    v
}

pub fn to_value(x: &impl Serialize) -> Value {
    serde_json::to_value(x).expect("in-memory values always serialize")
}

/// Writes `<dir>/<name>.csv` and `<dir>/<name>.json`.
pub fn write_dataset(dir: &Path, name: &str, table: &Table, meta: Value) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let csv = dir.join(format!("{name}.csv"));
    std::fs::write(&csv, table.to_csv()).with_context(|| format!("writing {}", csv.display()))?;
    let json_path = dir.join(format!("{name}.json"));
    let text = serde_json::to_string_pretty(&sidecar(meta))? + "\n";
    std::fs::write(&json_path, text).with_context(|| format!("writing {}", json_path.display()))?;
    Ok(csv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_round_trip_floats_and_lf() {
        let mut t = Table::new(["omega", "S", "cutoff"]);
        t.push(vec![0.1.into(), (1.0 / 3.0).into(), 7usize.into()]);
        t.push(vec![1e-20.into(), 2.0.into(), 8usize.into()]);
        let csv = t.to_csv();
        assert_eq!(
            csv,
            "omega,S,cutoff\n0.1,0.3333333333333333,7\n1e-20,2.0,8\n"
        );
        let parsed: f64 = csv.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(parsed, 1.0 / 3.0);
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn sidecar_merges_body() {
        let v = sidecar(json!({ "a": 1 }));
        assert_eq!(v["a"], 1);
        assert_eq!(v["ewspec_version"], VERSION);
    }
}
