use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};

/// Outcome of an experiment, ordered by severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    ToleranceViolation,
    HypothesisUnmet,
}

impl Status {
    /// Process exit code for this outcome.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::ToleranceViolation => 2,
            Status::HypothesisUnmet => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::ToleranceViolation => "tolerance_violation",
            Status::HypothesisUnmet => "hypothesis_unmet",
        }
    }
}

/// A table entry.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Seventeen significant digits; non-finite values spelled out.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

struct Float(f64);

impl Serialize for Float {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            RawValue::from_string(format_float(self.0)).map_err(serde::ser::Error::custom)?.serialize(s)
        } else {
            s.serialize_str(&format_float(self.0))
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::Num(v) => Float(*v).serialize(s),
            Cell::Int(v) => s.serialize_i64(*v),
            Cell::Text(v) => s.serialize_str(v),
            Cell::Bool(v) => s.serialize_bool(*v),
        }
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => csv_escape(v),
        }
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Numeric column by name.
    pub fn column(&self, name: &str) -> Vec<f64> {
        let Some(k) = self.columns.iter().position(|c| c == name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .filter_map(|r| match r[k] {
                Cell::Num(v) => Some(v),
                Cell::Int(v) => Some(v as f64),
                _ => None,
            })
            .collect()
    }
}

/// An empirical constant with the grid that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// The same constant on the refined grid.
    pub refined: Option<f64>,
    /// Relative change under refinement.
    pub delta: Option<f64>,
    pub tolerance: String,
    pub pass: bool,
    /// Failing checks with `gating == false` are findings only.
    pub gating: bool,
    pub grid: String,
}

impl Check {
    pub fn new(name: &str, value: f64, tolerance: &str, pass: bool, grid: &str) -> Self {
        Check {
            name: name.into(),
            value,
            refined: None,
            delta: None,
            tolerance: tolerance.into(),
            pass,
            gating: true,
            grid: grid.into(),
        }
    }

    /// A finding that is reported but never fails the run.
    pub fn finding(mut self) -> Self {
        self.gating = false;
        self
    }
}

impl Serialize for Check {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(8))?;
        m.serialize_entry("name", &self.name)?;
        m.serialize_entry("value", &Float(self.value))?;
        m.serialize_entry("refined", &self.refined.map(Float))?;
        m.serialize_entry("delta", &self.delta.map(Float))?;
        m.serialize_entry("tolerance", &self.tolerance)?;
        m.serialize_entry("pass", &self.pass)?;
        m.serialize_entry("gating", &self.gating)?;
        m.serialize_entry("grid", &self.grid)?;
        m.end()
    }
}

struct Notes<'a>(&'a [String]);

impl Serialize for Notes<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for n in self.0 {
            seq.serialize_element(n)?;
        }
        seq.end()
    }
}

/// Everything an experiment produced.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub kind: String,
    /// The configuration text exactly as read.
    pub config: Option<String>,
    /// Command-line overrides applied on top of the configuration.
    pub overrides: Vec<(String, String)>,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    pub notes: Vec<String>,
    pub status: Status,
}

impl VerificationReport {
    pub fn new(kind: &str) -> Self {
        VerificationReport {
            kind: kind.into(),
            config: None,
            overrides: Vec::new(),
            checks: Vec::new(),
            tables: Vec::new(),
            notes: Vec::new(),
            status: Status::Pass,
        }
    }

    /// Sets the status from the gating checks, keeping `HypothesisUnmet`.
    pub fn finalize(mut self) -> Self {
        if self.status != Status::HypothesisUnmet {
            let failed = self.checks.iter().any(|c| c.gating && !c.pass);
            self.status = if failed { Status::ToleranceViolation } else { Status::Pass };
        }
        self
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Doc<'a> {
            kind: &'a str,
            status: Status,
            config: Option<&'a RawValue>,
            overrides: &'a [(String, String)],
            checks: &'a [Check],
            tables: &'a [Table],
            notes: Notes<'a>,
        }
        let raw = match &self.config {
            Some(text) => Some(
                serde_json::from_str::<&RawValue>(text)
                    .map_err(|e| Error::Config(format!("configuration is not valid JSON: {e}")))?,
            ),
            None => None,
        };
        let doc = Doc {
            kind: &self.kind,
            status: self.status,
            config: raw,
            overrides: &self.overrides,
            checks: &self.checks,
            tables: &self.tables,
            notes: Notes(&self.notes),
        };
        let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::Config(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# isqlab report: {}", self.kind);
        let _ = writeln!(out, "# status: {}", self.status.as_str());
        if let Some(cfg) = &self.config {
            out.push_str("# config:\n");
            for line in cfg.lines() {
                let _ = writeln!(out, "#   {line}");
            }
        }
        for (k, v) in &self.overrides {
            let _ = writeln!(out, "# override: {k} = {v}");
        }
        for n in &self.notes {
            let _ = writeln!(out, "# note: {n}");
        }
        if !self.checks.is_empty() {
            out.push_str("\n# table: checks\nname,value,refined,delta,tolerance,pass,gating,grid\n");
            for c in &self.checks {
                let opt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    csv_escape(&c.name),
                    format_float(c.value),
                    opt(c.refined),
                    opt(c.delta),
                    csv_escape(&c.tolerance),
                    c.pass,
                    c.gating,
                    csv_escape(&c.grid)
                );
            }
        }
        for t in &self.tables {
            let _ = writeln!(out, "\n# table: {}", t.name);
            let _ = writeln!(out, "{}", t.columns.iter().map(|c| csv_escape(c)).collect::<Vec<_>>().join(","));
            for row in &t.rows {
                let _ = writeln!(out, "{}", row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            }
        }
        out
    }
}

/// Output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown report format `{s}`"))),
        }
    }
}

/// Writes `<dir>/<kind>.<ext>` and returns its path.
pub fn emit(report: &VerificationReport, format: Format, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (ext, body) = match format {
        Format::Csv => ("csv", report.to_csv()),
        Format::Json => ("json", report.to_json()?),
    };
    let path = dir.join(format!("{}.{ext}", report.kind));
    std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
