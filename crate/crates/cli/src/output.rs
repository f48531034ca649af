//! CSV tables, JSON summaries and the console report.

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use thermoscope::Length;

/// Console line; a closed stdout (e.g. a pipe into `head`) is not an error.
pub fn say(line: impl Display) {
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

/// Seventeen significant digits, enough for a lossless round trip.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

pub fn or_none(x: Option<f64>) -> String {
    x.map(num).unwrap_or_else(|| "none".into())
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn length_value(l: Length) -> Value {
    match l {
        Length::Finite(v) => Value::from(v),
        Length::Infinite => Value::from("inf"),
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// A computed quantity, optionally compared with a reference value.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub quantity: String,
    pub unit: String,
    pub computed: f64,
    pub reference: Option<f64>,
    pub abs_err: Option<f64>,
    pub rel_err: Option<f64>,
    /// `closed_form`, `independent_numerical` or `none`.
    pub reference_kind: String,
}

impl ReportRow {
    pub fn new(quantity: &str, unit: &str, computed: f64, reference: Option<(f64, &str)>) -> Self {
        let (reference, kind) = match reference {
            Some((r, k)) => (Some(r), k.to_string()),
            None => (None, "none".to_string()),
        };
        let abs_err = reference.map(|r| (computed - r).abs());
        let rel_err =
            reference.and_then(|r| abs_err.map(|e| if r != 0.0 { e / r.abs() } else { e }));
        Self {
            quantity: quantity.into(),
            unit: unit.into(),
            computed,
            reference,
            abs_err,
            rel_err,
            reference_kind: kind,
        }
    }
}

pub struct Report {
    command: &'static str,
    out: PathBuf,
    params: Map<String, Value>,
    results: Map<String, Value>,
    checks: Vec<Check>,
    artifacts: Vec<String>,
}

impl Report {
    pub fn new(command: &'static str, out: PathBuf) -> Result<Self> {
        std::fs::create_dir_all(&out)
            .with_context(|| format!("cannot create {}", out.display()))?;
        Ok(Self {
            command,
            out,
            params: Map::new(),
            results: Map::new(),
            checks: Vec::new(),
            artifacts: Vec::new(),
        })
    }

    pub fn param(&mut self, key: &str, v: impl Serialize) {
        self.params
            .insert(key.into(), serde_json::to_value(v).expect("serializable"));
    }

    pub fn result(&mut self, key: &str, v: impl Serialize) {
        self.results
            .insert(key.into(), serde_json::to_value(v).expect("serializable"));
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        write_csv(&self.out.join(name), header, rows)?;
        self.artifacts.push(name.into());
        Ok(())
    }

    pub fn rows(&mut self, name: &str, rows: &[ReportRow]) -> Result<()> {
        let body: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.quantity.clone(),
                    r.unit.clone(),
                    num(r.computed),
                    opt(r.reference),
                    opt(r.abs_err),
                    opt(r.rel_err),
                    r.reference_kind.clone(),
                ]
            })
            .collect();
        self.csv(
            name,
            &[
                "quantity",
                "unit",
                "computed",
                "reference",
                "abs_err",
                "rel_err",
                "reference_kind",
            ],
            &body,
        )?;
        for r in rows {
            say(format!(
                "{:<14} {:>24} {}",
                r.quantity,
                num(r.computed),
                r.reference
                    .map(|v| format!(
                        "(reference {}, rel err {:.2e})",
                        num(v),
                        r.rel_err.unwrap_or(0.0)
                    ))
                    .unwrap_or_default()
            ));
        }
        self.result("constants", rows);
        Ok(())
    }

    /// Writes `<command>_summary.json`, prints the checks and returns whether all passed.
    pub fn finish(mut self) -> Result<bool> {
        let passed = self.checks.iter().all(|c| c.passed);
        let name = format!("{}_summary.json", self.command);
        self.artifacts.push(name.clone());
        let mut doc = Map::new();
        doc.insert("command".into(), Value::from(self.command));
        doc.insert("params".into(), Value::Object(self.params));
        doc.insert("results".into(), Value::Object(self.results));
        doc.insert("checks".into(), serde_json::to_value(&self.checks)?);
        doc.insert("passed".into(), Value::from(passed));
        doc.insert("artifacts".into(), serde_json::to_value(&self.artifacts)?);
        let mut text = serde_json::to_string_pretty(&Value::Object(doc))?;
        text.push('\n');
        let path = self.out.join(&name);
        std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        for c in &self.checks {
            say(format!(
                "[{}] {}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            ));
        }
        for a in &self.artifacts {
            say(format!("wrote {}", self.out.join(a).display()));
        }
        Ok(passed)
    }
}
