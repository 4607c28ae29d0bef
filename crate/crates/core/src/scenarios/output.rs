//! CSV tables, pass/fail gates and the run manifest.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:?}")
    }
}

/// JSON number, or a string for values JSON cannot hold.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::String(fmt_float(x))
    }
}

/// A named table of floats, written as CSV with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|x| fmt_float(*x)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn from_csv(name: impl Into<String>, text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| Error::Parse { line: 1, message: "empty csv".into() })?
            .split(',')
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|c| {
                    c.parse::<f64>().map_err(|_| Error::Parse { line: i + 2, message: format!("bad number `{c}`") })
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != header.len() {
                return Err(Error::Parse { line: i + 2, message: "wrong column count".into() });
            }
            rows.push(row);
        }
        Ok(Self { name: name.into(), header, rows })
    }
}

/// A pass/fail check recorded in the manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    /// `"<="`, `">="`, `"<"` or `">"`; how `value` is compared to `threshold`.
    pub relation: &'static str,
}

impl Gate {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), passed: value <= threshold, value, threshold, relation: "<=" }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), passed: value >= threshold, value, threshold, relation: ">=" }
    }

    pub fn below(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), passed: value < threshold, value, threshold, relation: "<" }
    }

    pub fn above(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), passed: value > threshold, value, threshold, relation: ">" }
    }

    pub fn flag(name: &str, passed: bool) -> Self {
        let v = if passed { 1.0 } else { 0.0 };
        Self { name: name.into(), passed, value: v, threshold: 1.0, relation: ">=" }
    }

    fn to_json(&self) -> Value {
        json!({
            "passed": self.passed,
            "value": num(self.value),
            "threshold": num(self.threshold),
            "relation": self.relation,
        })
    }
}

/// Min, max and final value of a diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub min: f64,
    pub max: f64,
    pub last: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        Self {
            min: values.iter().cloned().fold(f64::INFINITY, f64::min),
            max: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            last: values.last().copied().unwrap_or(f64::NAN),
        }
    }

    pub fn scalar(x: f64) -> Self {
        Self { min: x, max: x, last: x }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub scenario: String,
    pub config: Map<String, Value>,
    pub summary: BTreeMap<String, Summary>,
    pub gates: Vec<Gate>,
    /// Free-form extra facts (strings or numbers).
    pub notes: Map<String, Value>,
    /// sha256 of every emitted CSV, keyed by file name.
    pub files: BTreeMap<String, String>,
    pub wall_clock_s: f64,
}

impl RunManifest {
    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            2
        }
    }

    pub fn gate(&self, name: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.name == name)
    }

    /// Everything except the wall clock and the hash itself.
    fn body(&self) -> Value {
        let summary: Map<String, Value> = self
            .summary
            .iter()
            .map(|(k, s)| (k.clone(), json!({"min": num(s.min), "max": num(s.max), "final": num(s.last)})))
            .collect();
        let gates: Map<String, Value> = self.gates.iter().map(|g| (g.name.clone(), g.to_json())).collect();
        json!({
            "artifact_version": env!("CARGO_PKG_VERSION"),
            "scenario": self.scenario,
            "config": self.config,
            "summary": summary,
            "gates": gates,
            "all_gates_passed": self.passed(),
            "notes": self.notes,
            "files": self.files,
        })
    }

    /// sha256 of the canonical body, which covers every CSV through `files`.
    pub fn content_hash(&self) -> String {
        let body = serde_json::to_string(&self.body()).expect("json values serialize");
        hex::encode(Sha256::digest(body.as_bytes()))
    }

    pub fn to_json(&self) -> String {
        let mut v = self.body();
        let obj = v.as_object_mut().expect("body is an object");
        obj.insert("content_hash".into(), Value::String(self.content_hash()));
        obj.insert("wall_clock_s".into(), num(self.wall_clock_s));
        let mut s = serde_json::to_string_pretty(&v).expect("json values serialize");
        s.push('\n');
        s
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes every table as `<name>.csv` plus `manifest.json` into `dir`.
pub fn write_outputs(dir: &Path, tables: &[Table], manifest: &RunManifest) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for t in tables {
        std::fs::write(dir.join(format!("{}.csv", t.name)), t.to_csv())?;
    }
    std::fs::write(dir.join("manifest.json"), manifest.to_json())?;
    Ok(())
}
