use std::collections::BTreeMap;
use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Command, Format};
use crate::CliError;

pub const SCHEMA_VERSION: u64 = 1;

/// One acceptance criterion evaluated on the run's results.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// Human-readable bound, e.g. `>= 0.9`.
    pub threshold: String,
    pub value: Value,
    pub passed: bool,
}

impl Check {
    pub fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Self {
            name: name.to_owned(),
            threshold: format!(">= {bound}"),
            value: json!(value),
            passed: value >= bound,
        }
    }

    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Self {
            name: name.to_owned(),
            threshold: format!("<= {bound}"),
            value: json!(value),
            passed: value <= bound,
        }
    }

    pub fn within(name: &str, value: f64, center: f64, tol: f64) -> Self {
        Self {
            name: name.to_owned(),
            threshold: format!("{center} +/- {tol}"),
            value: json!(value),
            passed: (value - center).abs() <= tol,
        }
    }

    pub fn holds(name: &str, passed: bool) -> Self {
        Self {
            name: name.to_owned(),
            threshold: "true".to_owned(),
            value: json!(passed),
            passed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub results: Value,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn failed_checks(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn to_value(&self) -> Result<Value, CliError> {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Ok(json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "params": self.params,
            "results": self.results,
            "checks": serde_json::to_value(&self.checks).map_err(|e| CliError::Internal(e.to_string()))?,
            "meta": {
                "timestamp_unix": timestamp,
                "version": env!("CARGO_PKG_VERSION"),
            },
        }))
    }
}

/// Flattens a JSON value into `(path, scalar)` rows, e.g.
/// `results.grid[0].lowweight.rate`.
pub fn flatten(value: &Value) -> Vec<(String, String)> {
    fn walk(v: &Value, path: String, out: &mut Vec<(String, String)>) {
        match v {
            Value::Object(m) => {
                for (k, child) in m {
                    let p = if path.is_empty() {
                        k.clone()
                    } else {
                        format!("{path}.{k}")
                    };
                    walk(child, p, out);
                }
            }
            Value::Array(a) => {
                for (i, child) in a.iter().enumerate() {
                    walk(child, format!("{path}[{i}]"), out);
                }
            }
            Value::String(s) => out.push((path, s.clone())),
            Value::Null => out.push((path, String::new())),
            other => out.push((path, other.to_string())),
        }
    }
    let mut out = Vec::new();
    walk(value, String::new(), &mut out);
    out
}

pub fn render(value: &Value, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Json => {
            let mut s =
                serde_json::to_vec_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
            s.push(b'\n');
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["key", "value"])
                .map_err(|e| CliError::Internal(e.to_string()))?;
            for (k, v) in flatten(value) {
                w.write_record([k, v])
                    .map_err(|e| CliError::Internal(e.to_string()))?;
            }
            w.into_inner()
                .map_err(|e| CliError::Internal(e.to_string()))
        }
    }
}

/// Writes to `--out`, or to stdout. For gen-data `--out` names the dataset,
/// so its report always goes to stdout.
pub fn write(cmd: &Command, value: &Value) -> Result<(), CliError> {
    let common = cmd.common();
    let bytes = render(value, common.format.unwrap_or(Format::Json))?;
    match (&common.out, cmd) {
        (Some(path), c) if !matches!(c, Command::GenData(_)) => std::fs::write(path, bytes)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        _ => {
            let mut out = std::io::stdout().lock();
            out.write_all(&bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}
