//! Report records, JSON rendering and the CSV check table.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const REPORT_SCHEMA: &str = "kfcalc.report/1";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// JSON number, or a string for values JSON cannot represent.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        serde_json::json!(x)
    } else if x.is_nan() {
        Value::from("nan")
    } else if x > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}

fn ser_num<S: serde::Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    num(*x).serialize(s)
}

/// One compared quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub quantity: String,
    #[serde(serialize_with = "ser_num")]
    pub expected: f64,
    #[serde(serialize_with = "ser_num")]
    pub actual: f64,
    #[serde(serialize_with = "ser_num")]
    pub abs_error: f64,
    #[serde(serialize_with = "ser_num")]
    pub rel_error: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(quantity: impl Into<String>, expected: f64, actual: f64, pass: bool) -> Self {
        let abs_error = if expected == actual { 0.0 } else { (expected - actual).abs() };
        let scale = expected.abs().max(actual.abs());
        let rel_error = if abs_error == 0.0 {
            0.0
        } else if scale.is_finite() && scale > 0.0 {
            abs_error / scale
        } else {
            f64::INFINITY
        };
        Self {
            quantity: quantity.into(),
            expected,
            actual,
            abs_error,
            rel_error,
            pass,
        }
    }

    /// Passes when the relative error is at most `tol` (exact equality when
    /// both sides vanish).
    pub fn relative(quantity: impl Into<String>, expected: f64, actual: f64, tol: f64) -> Self {
        let mut c = Self::new(quantity, expected, actual, false);
        c.pass = c.rel_error <= tol;
        c
    }

    /// Passes when `actual` is exactly `expected`.
    pub fn exact(quantity: impl Into<String>, expected: f64, actual: f64) -> Self {
        Self::new(quantity, expected, actual, expected == actual)
    }

    /// A yes/no quantity, recorded as 1 or 0.
    pub fn flag(quantity: impl Into<String>, expected: bool, actual: bool) -> Self {
        Self::new(quantity, f64::from(u8::from(expected)), f64::from(u8::from(actual)), expected == actual)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentRecord {
    pub index: usize,
    pub id: String,
    pub op: String,
    pub inputs_sha256: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub outputs: Value,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

pub const TOOL: Tool = Tool {
    name: "kfcalc",
    version: env!("CARGO_PKG_VERSION"),
};

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioInfo {
    pub name: String,
    pub sha256: String,
    pub atoms: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Summary {
    pub experiments: usize,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
    pub checks: usize,
    pub checks_failed: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub tool: Tool,
    pub scenario: ScenarioInfo,
    pub seed: u64,
    pub replicas: u64,
    pub experiments: Vec<ExperimentRecord>,
    pub summary: Summary,
}

impl Report {
    pub fn summarize(records: &[ExperimentRecord]) -> Summary {
        let mut s = Summary {
            experiments: records.len(),
            ..Summary::default()
        };
        for r in records {
            match r.status {
                Status::Pass => s.passed += 1,
                Status::Fail => s.failed += 1,
                Status::Error => s.errors += 1,
            }
            s.checks += r.checks.len();
            s.checks_failed += r.checks.iter().filter(|c| !c.pass).count();
        }
        s
    }

    pub fn all_passed(&self) -> bool {
        self.summary.passed == self.summary.experiments
    }

    pub fn write_csv(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let rows = self
            .experiments
            .iter()
            .flat_map(|e| e.checks.iter().map(move |c| (e.id.as_str(), c)));
        write_checks_csv(&dir.join("checks.csv"), rows)
    }
}

fn fmt_num(x: f64) -> String {
    // Rust's shortest round-trip formatting: '.' decimal, no locale, no grouping.
    if x.is_finite() {
        format!("{x:?}")
    } else {
        num(x).as_str().unwrap_or_default().to_string()
    }
}

/// Writes `experiment,quantity,expected,actual,abs_error,rel_error,pass`
/// rows with LF line endings.
pub fn write_checks_csv<'a>(
    path: &Path,
    rows: impl Iterator<Item = (&'a str, &'a Check)>,
) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    w.write_record(["experiment", "quantity", "expected", "actual", "abs_error", "rel_error", "pass"])?;
    for (id, c) in rows {
        w.write_record([
            id.to_string(),
            c.quantity.clone(),
            fmt_num(c.expected),
            fmt_num(c.actual),
            fmt_num(c.abs_error),
            fmt_num(c.rel_error),
            c.pass.to_string(),
        ])?;
    }
    w.flush()
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> std::io::Result<()> {
    let text = to_json(value);
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, text)
        }
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_errors() {
        let c = Check::relative("x", 2.0, 2.0 + 4e-16, 1e-15);
        assert!(c.pass);
        assert!(c.rel_error > 0.0);
        let z = Check::relative("zero", 0.0, 0.0, 0.0);
        assert!(z.pass);
        assert!(!Check::relative("off", 0.0, 1e-300, 1e-12).pass);
        assert_eq!(Check::flag("f", true, false).actual, 0.0);
    }

    #[test]
    fn non_finite_numbers_render_as_strings() {
        assert_eq!(num(f64::INFINITY), Value::from("inf"));
        assert_eq!(num(1.5), serde_json::json!(1.5));
        assert_eq!(fmt_num(0.1), "0.1");
        assert_eq!(fmt_num(1e-20), "1e-20");
    }

    #[test]
    fn csv_uses_lf() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        let c = Check::exact("q", 1.0, 1.0);
        write_checks_csv(&path, [("e", &c)].into_iter()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "experiment,quantity,expected,actual,abs_error,rel_error,pass\ne,q,1.0,1.0,0.0,0.0,true\n"
        );
    }
}
