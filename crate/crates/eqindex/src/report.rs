//! Scenario reports: one CSV row per evaluation and a versioned JSON summary.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use eqindex_core::equivariant_index::PiSum;
use eqindex_core::scalar::{Coeff, QC};
use num_complex::Complex64;
use num_rational::BigRational;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_COLUMNS: [&str; 5] = ["label", "parameter", "value_re", "value_im", "error_bound"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub label: String,
    pub parameter: String,
    #[serde(serialize_with = "complex_pair")]
    pub value: Complex64,
    pub error_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

impl Row {
    pub fn new(label: impl Into<String>, parameter: impl Into<String>, value: Complex64, error_bound: f64) -> Self {
        Row {
            label: label.into(),
            parameter: parameter.into(),
            value,
            error_bound,
            exact: None,
        }
    }

    pub fn with_exact(mut self, exact: String) -> Self {
        self.exact = Some(exact);
        self
    }
}

fn complex_pair<S: serde::Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub schema_version: u32,
    pub scenario: String,
    pub kind: String,
    pub precision: String,
    pub results: Vec<Row>,
    pub checks: Vec<Check>,
}

impl ScenarioReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_COLUMNS).expect("in-memory write");
        for r in &self.results {
            w.write_record([
                r.label.clone(),
                r.parameter.clone(),
                number(r.value.re),
                number(r.value.im),
                number(r.error_bound),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 records")
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Writes `<scenario>.csv` and `<scenario>.json` into `dir`.
    pub fn write(&self, dir: &Path) -> io::Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{}.csv", self.scenario));
        let json_path = dir.join(format!("{}.json", self.scenario));
        fs::write(&csv_path, self.to_csv())?;
        fs::write(&json_path, self.to_json())?;
        Ok((csv_path, json_path))
    }
}

/// Shortest round-trip form, in exponent notation outside `[1e-4, 1e15)`.
pub fn number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 {
        "0".into()
    } else if !a.is_finite() || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// `p/q` for half-integers and other rationals, plain integers otherwise.
pub fn fraction(num: i64, den: i64) -> String {
    let r = BigRational::new(num.into(), den.into());
    r.to_string()
}

fn qc_string(z: &QC) -> String {
    if z.im == BigRational::from_integer(0.into()) {
        z.re.to_string()
    } else {
        format!("{} + {}i", z.re, z.im)
    }
}

/// `Σ (a + bi)·π^{k/2}` with exponents as fractions.
pub fn pi_sum_string(s: &PiSum<QC>) -> String {
    if s.is_zero() {
        return "0".into();
    }
    s.parts
        .iter()
        .filter(|(_, v)| !Coeff::is_zero(*v))
        .map(|(k, v)| {
            if *k == 0 {
                format!("({})", qc_string(v))
            } else {
                format!("({})*pi^({})", qc_string(v), fraction(*k as i64, 2))
            }
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ScenarioReport {
        ScenarioReport {
            schema_version: SCHEMA_VERSION,
            scenario: "demo".into(),
            kind: "heat_trace".into(),
            precision: "f64".into(),
            results: vec![
                Row::new("r0", "0.1", Complex64::new(0.1, -2.5e-17), 1e-300),
                Row::new("fit", fraction(-1, 2), Complex64::new(1.0, 0.0), 0.0),
            ],
            checks: vec![Check {
                name: "zero".into(),
                pass: true,
                detail: "ok".into(),
            }],
        }
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("label,parameter,value_re,value_im,error_bound"));
        assert_eq!(lines.next(), Some("r0,0.1,0.1,-2.5e-17,1e-300"));
        assert_eq!(lines.next(), Some("fit,-1/2,1,0,0"));
        assert_eq!(number(-0.0), "0");
    }

    #[test]
    fn json_pairs_and_order() {
        let j = sample().to_json();
        let v: serde_json::Value = serde_json::from_str(&j).unwrap();
        assert_eq!(v["results"][0]["value"][0], 0.1);
        assert_eq!(v["schema_version"], 1);
        assert!(j.find("\"scenario\"").unwrap() < j.find("\"results\"").unwrap());
        assert_eq!(sample().to_json(), j);
    }
}
