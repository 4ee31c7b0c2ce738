//! JSON reports with CSV mirrors of their tables.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::error::{LabError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Columns of every sweep table written as CSV.
pub const SWEEP_COLUMNS: [&str; 5] = ["j_or_t", "measured", "predicted", "ratio", "pass"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    /// Standard sweep table with [`SWEEP_COLUMNS`].
    pub fn sweep(name: &str) -> Self {
        Self::new(name, &SWEEP_COLUMNS)
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_sweep(&mut self, j_or_t: f64, measured: f64, predicted: f64, ratio: f64, pass: bool) {
        self.push(vec![num(j_or_t), num(measured), num(predicted), num(ratio), Value::Bool(pass)]);
    }
}

/// JSON number, or `null` when not finite.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub experiment: String,
    /// Resolved configuration after merging the config file and flags.
    pub config: Value,
    pub seed: Option<u64>,
    /// Seconds since the Unix epoch; the only field that varies between identical runs.
    pub timestamp: u64,
    pub checks: Vec<Check>,
    /// Scalar results.
    pub values: serde_json::Map<String, Value>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(experiment: &str, config: Value, seed: Option<u64>) -> Self {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Report {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.into(),
            config,
            seed,
            timestamp,
            checks: Vec::new(),
            values: serde_json::Map::new(),
            tables: Vec::new(),
        }
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), pass, detail: detail.into() });
    }

    pub fn value(&mut self, key: &str, v: impl Into<Value>) {
        self.values.insert(key.into(), v.into());
    }

    pub fn number(&mut self, key: &str, v: f64) {
        self.values.insert(key.into(), num(v));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report values are always serialisable")
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json() + "\n").map_err(|e| LabError::io(path, e))
    }

    /// Writes one table as CSV; JSON `null` becomes an empty field.
    pub fn write_table_csv(table: &Table, path: &Path) -> Result<()> {
        let wrap = |e: csv::Error| LabError::io(path, e.into());
        let mut w = csv::Writer::from_path(path).map_err(wrap)?;
        w.write_record(&table.columns).map_err(wrap)?;
        for row in &table.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|v| match v {
                    Value::Null => String::new(),
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect();
            w.write_record(&fields).map_err(wrap)?;
        }
        w.flush().map_err(|e| LabError::io(path, e))
    }

    /// Writes the report to the requested places and returns the paths written.
    ///
    /// `json` and `csv` are explicit paths (the CSV gets the first table);
    /// `out_dir` receives `<experiment>.json` and `<experiment>_<table>.csv` for every table.
    pub fn write(&self, json: Option<&Path>, csv: Option<&Path>, out_dir: Option<&Path>) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        if let Some(dir) = out_dir {
            fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
            let path = dir.join(format!("{}.json", self.experiment));
            self.write_json(&path)?;
            written.push(path);
            for t in &self.tables {
                let path = dir.join(format!("{}_{}.csv", self.experiment, t.name));
                Self::write_table_csv(t, &path)?;
                written.push(path);
            }
        }
        if let Some(path) = json {
            self.write_json(path)?;
            written.push(path.to_path_buf());
        }
        if let Some(path) = csv {
            let table = self
                .tables
                .first()
                .ok_or_else(|| LabError::invalid(format!("experiment {} produces no table for --csv", self.experiment)))?;
            Self::write_table_csv(table, path)?;
            written.push(path.to_path_buf());
        }
        Ok(written)
    }
}
