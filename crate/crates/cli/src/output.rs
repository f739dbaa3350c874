//! Deterministic CSV and JSON serialization.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, ScenarioConfig};
use crate::error::CliError;

pub const TOOL_VERSION: &str = concat!("dpa-lab ", env!("CARGO_PKG_VERSION"));
pub const MEASURE_NOTE: &str =
    "beta = (q + i p)/sqrt(2); d^2beta = dRe(beta) dIm(beta); W integrates to 1 over d^2beta1 d^2beta2";

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

/// Round to 12 significant digits.
pub fn round12(v: f64) -> f64 {
    format!("{v:.11e}").parse().expect("formatted float parses")
}

/// Shortest representation of `v` rounded to 12 significant digits; `-0` prints as `0`.
pub fn format_number(v: f64) -> Result<String, CliError> {
    if !v.is_finite() {
        return Err(CliError::Output(format!("non-finite value {v} in output")));
    }
    let r = round12(v);
    if r == 0.0 {
        return Ok("0".into());
    }
    let a = r.abs();
    Ok(if (1e-5..1e15).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    })
}

impl Cell {
    fn csv(&self) -> Result<String, CliError> {
        Ok(match self {
            Cell::Num(v) => format_number(*v)?,
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        })
    }

    fn json(&self) -> Result<Value, CliError> {
        Ok(match self {
            Cell::Num(v) => {
                format_number(*v)?;
                json!(round12(*v) + 0.0)
            }
            Cell::Int(i) => json!(i),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
        })
    }
}

/// One output table.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// File stem.
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra `key: value` lines for the CSV preamble.
    pub meta: Vec<(String, String)>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            meta: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch in {}", self.name);
        self.rows.push(row);
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.meta.push((key.to_string(), value.into()));
        self
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric cells of column `name`.
    pub fn numbers(&self, name: &str) -> Vec<f64> {
        let Some(j) = self.column(name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .filter_map(|r| match r[j] {
                Cell::Num(v) => Some(v),
                Cell::Int(i) => Some(i as f64),
                _ => None,
            })
            .collect()
    }

    pub fn to_csv(&self, config_hash: &str) -> Result<String, CliError> {
        let mut s = String::new();
        writeln!(s, "# tool: {TOOL_VERSION}").unwrap();
        writeln!(s, "# config_sha256: {config_hash}").unwrap();
        writeln!(s, "# measure: {MEASURE_NOTE}").unwrap();
        for (k, v) in &self.meta {
            writeln!(s, "# {k}: {v}").unwrap();
        }
        writeln!(s, "{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            let cells = row.iter().map(Cell::csv).collect::<Result<Vec<_>, _>>()?;
            writeln!(s, "{}", cells.join(",")).unwrap();
        }
        Ok(s)
    }

    pub fn to_json(&self, config_hash: &str) -> Result<String, CliError> {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::json).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let meta: serde_json::Map<String, Value> =
            self.meta.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        let doc = json!({
            "tool": TOOL_VERSION,
            "config_sha256": config_hash,
            "measure": MEASURE_NOTE,
            "meta": meta,
            "columns": self.columns,
            "rows": rows,
        });
        Ok(serde_json::to_string_pretty(&doc).expect("json serializes") + "\n")
    }

    pub fn render(&self, format: Format, config_hash: &str) -> Result<String, CliError> {
        match format {
            Format::Csv => self.to_csv(config_hash),
            Format::Json => self.to_json(config_hash),
        }
    }

    pub fn file_name(&self, format: Format) -> String {
        match format {
            Format::Csv => format!("{}.csv", self.name),
            Format::Json => format!("{}.json", self.name),
        }
    }
}

/// Everything a figure or table command produces.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub id: String,
    pub datasets: Vec<Dataset>,
    /// Convergence or tolerance information, one entry per computed group.
    pub convergence: Vec<Value>,
    /// Extra JSON files (name, contents) written next to the datasets.
    pub extras: Vec<(String, Value)>,
    /// Fully resolved parameters used to produce the datasets.
    pub parameters: Value,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    figure: &'a str,
    files: Vec<String>,
    config: Value,
    versions: Value,
    convergence: &'a [Value],
}

pub fn versions() -> Value {
    json!({
        "dpa-lab": env!("CARGO_PKG_VERSION"),
        "dpa-core": dpa_core::VERSION,
    })
}

/// Write every dataset plus `manifest.json` into `dir`; returns the paths written.
pub fn write_artifact(
    artifact: &Artifact,
    config: &ScenarioConfig,
    dir: &Path,
    format: Format,
) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let hash = config.hash();
    // render everything before touching the disk so a bad value leaves no partial output
    let mut files: Vec<(String, String)> = Vec::new();
    for ds in &artifact.datasets {
        files.push((ds.file_name(format), ds.render(format, &hash)?));
    }
    for (name, value) in &artifact.extras {
        files.push((name.clone(), serde_json::to_string_pretty(value).expect("json") + "\n"));
    }
    let manifest = Manifest {
        figure: &artifact.id,
        files: files.iter().map(|(n, _)| n.clone()).collect(),
        config: json!({
            "scenario": config.canonical(),
            "config_sha256": hash,
            "parameters": artifact.parameters,
        }),
        versions: versions(),
        convergence: &artifact.convergence,
    };
    files.push((
        "manifest.json".into(),
        serde_json::to_string_pretty(&manifest).expect("json") + "\n",
    ));
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}
