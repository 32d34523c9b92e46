//! Path CSV files, result JSON and report tables.
//!
//! A path file has one path per line, `n` comma-separated `0`/`1` fields,
//! and an optional header line `x1,...,xn`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bootstrap::{IntervalKind, IntervalPair};
use crate::error::{Error, Result};
use crate::estimate::{EstimateResult, Method};
use crate::experiments::CsvRecord;
use crate::model::{CellMatrix2, ModelParams};
use crate::simulate::PathSet;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

fn is_header(fields: &[&str]) -> bool {
    fields
        .iter()
        .enumerate()
        .all(|(j, f)| f.strip_prefix('x').and_then(|r| r.parse::<usize>().ok()) == Some(j + 1))
}

/// Parses path CSV text. Errors carry 1-based line numbers.
pub fn parse_paths(text: &str) -> Result<PathSet> {
    let mut width: Option<usize> = None;
    let mut choices = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if width.is_none() && choices.is_empty() && is_header(&fields) {
            width = Some(fields.len());
            continue;
        }
        let malformed = |reason: String| Error::MalformedRow {
            line: line_no,
            reason,
        };
        match width {
            Some(w) if w != fields.len() => {
                return Err(malformed(format!(
                    "expected {w} fields, found {}",
                    fields.len()
                )));
            }
            None => width = Some(fields.len()),
            _ => {}
        }
        for (j, f) in fields.iter().enumerate() {
            match *f {
                "0" => choices.push(0),
                "1" => choices.push(1),
                other => {
                    return Err(malformed(format!(
                        "field {} is '{other}', expected 0 or 1",
                        j + 1
                    )))
                }
            }
        }
    }
    match width {
        Some(n) if !choices.is_empty() => PathSet::new(n, choices),
        _ => Err(Error::EmptyData),
    }
}

pub fn read_paths(path: impl AsRef<Path>) -> Result<PathSet> {
    parse_paths(&fs::read_to_string(path)?)
}

/// Serializes paths with a header line.
pub fn format_paths(paths: &PathSet) -> String {
    let n = paths.len();
    let mut out = String::with_capacity((paths.n_paths() + 1) * (2 * n + 4));
    let header: Vec<String> = (1..=n).map(|j| format!("x{j}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for path in paths.iter() {
        for (j, &x) in path.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push(if x == 1 { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

pub fn write_paths(path: impl AsRef<Path>, paths: &PathSet) -> Result<()> {
    fs::write(path, format_paths(paths))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaJson {
    pub alpha: f64,
    pub c: f64,
}

impl From<ModelParams> for ThetaJson {
    fn from(p: ModelParams) -> Self {
        Self {
            alpha: p.alpha(),
            c: p.c(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiJson {
    pub alpha: [f64; 2],
    pub c: [f64; 2],
    pub level: f64,
    pub kind: IntervalKind,
}

impl From<&IntervalPair> for CiJson {
    fn from(ci: &IntervalPair) -> Self {
        Self {
            alpha: ci.alpha_ci,
            c: ci.c_ci,
            level: ci.level,
            kind: ci.kind,
        }
    }
}

/// The machine-readable result of a fit or bootstrap run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultJson {
    pub method: Method,
    pub theta_hat: ThetaJson,
    pub objective: f64,
    pub converged: bool,
    pub at_boundary: bool,
    /// Plug-in covariance of the estimate, `[[aa, ac], [ac, cc]]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub covariance: Option<[[f64; 2]; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci: Option<CiJson>,
    pub diagnostics: serde_json::Map<String, serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tool_version: String,
}

impl ResultJson {
    pub fn from_estimate(r: &EstimateResult) -> Self {
        let mut diagnostics = serde_json::Map::new();
        diagnostics.insert("n_restarts_used".into(), r.n_restarts_used.into());
        diagnostics.insert("n_local_converged".into(), r.n_local_converged.into());
        diagnostics.insert("skipped_cells".into(), r.skipped_cells.into());
        diagnostics.insert("grad_norm".into(), finite_or_null(r.grad_norm));
        Self {
            method: r.method,
            theta_hat: r.theta_hat.into(),
            objective: r.objective,
            converged: r.converged,
            at_boundary: r.at_boundary,
            covariance: None,
            ci: None,
            diagnostics,
            seed: None,
            tool_version: TOOL_VERSION.to_string(),
        }
    }

    pub fn with_covariance(mut self, cov: &CellMatrix2) -> Self {
        self.covariance = Some(cov.to_rows());
        self
    }

    pub fn with_interval(mut self, ci: &IntervalPair) -> Self {
        self.ci = Some(ci.into());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn note(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.diagnostics.insert(key.to_string(), value.into());
    }

    /// Rejects non-finite numbers, which JSON cannot carry.
    pub fn to_json(&self) -> Result<String> {
        let mut reals = vec![self.objective, self.theta_hat.alpha, self.theta_hat.c];
        if let Some(c) = self.covariance {
            reals.extend(c.iter().flatten());
        }
        if let Some(ci) = self.ci {
            reals.extend(ci.alpha.iter().chain(ci.c.iter()));
        }
        if reals.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }
}

/// JSON value of `v`, or `null` when it is not finite.
pub fn finite_or_null(v: f64) -> serde_json::Value {
    serde_json::Number::from_f64(v)
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}

/// Writes rows as CSV with a header line.
pub fn write_csv<R: CsvRecord>(out: impl Write, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(R::header()).map_err(csv_err)?;
    for r in rows {
        w.write_record(r.fields()).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `alpha,c` rows of estimates, e.g. bootstrap replicates.
pub fn write_estimates_csv(out: impl Write, estimates: &[ModelParams]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["alpha", "c"]).map_err(csv_err)?;
    for p in estimates {
        w.write_record([p.alpha().to_string(), p.c().to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{simulate_paths, Seed};

    #[test]
    fn parses_plain_and_headed_files() {
        let p = parse_paths("1,1\n0,1\n").unwrap();
        assert_eq!((p.n_paths(), p.len()), (2, 2));
        assert_eq!(p.path(1), &[0, 1]);
        let q = parse_paths("x1,x2\r\n1,1\r\n0,1\r\n").unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn reports_bad_rows_with_line_numbers() {
        assert_eq!(
            parse_paths("1,0\n1,2\n"),
            Err(Error::MalformedRow {
                line: 2,
                reason: "field 2 is '2', expected 0 or 1".into()
            })
        );
        assert!(matches!(
            parse_paths("1,0\n1\n"),
            Err(Error::MalformedRow { line: 2, .. })
        ));
        assert!(matches!(
            parse_paths("x1,x2\n1,0,1\n"),
            Err(Error::MalformedRow { line: 2, .. })
        ));
        assert!(matches!(
            parse_paths("1,0,\n"),
            Err(Error::MalformedRow { line: 1, .. })
        ));
        assert_eq!(parse_paths(""), Err(Error::EmptyData));
        assert_eq!(parse_paths("x1,x2,x3\n"), Err(Error::EmptyData));
    }

    #[test]
    fn round_trip() {
        let paths = simulate_paths(&ModelParams::new(1.3, 0.7).unwrap(), 17, 23, Seed(5)).unwrap();
        assert_eq!(parse_paths(&format_paths(&paths)).unwrap(), paths);
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("p.csv");
        write_paths(&file, &paths).unwrap();
        assert_eq!(read_paths(&file).unwrap(), paths);
        assert!(matches!(
            read_paths(dir.path().join("missing.csv")),
            Err(Error::Io(_))
        ));
    }

    #[test]
    fn json_refuses_non_finite_values() {
        let r = EstimateResult {
            theta_hat: ModelParams::new(1.0, 2.0).unwrap(),
            method: Method::Mle,
            objective: 0.5,
            converged: true,
            n_restarts_used: 25,
            n_local_converged: 25,
            at_boundary: false,
            skipped_cells: 0,
            grad_norm: 0.0,
        };
        let ok = ResultJson::from_estimate(&r).to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&ok).unwrap();
        assert_eq!(v["method"], "mle");
        assert_eq!(v["tool_version"], TOOL_VERSION);
        assert!(v.get("covariance").is_none());
        let bad =
            ResultJson::from_estimate(&r).with_covariance(&CellMatrix2::new(f64::NAN, 0.0, 1.0));
        assert_eq!(bad.to_json(), Err(Error::NonFinite));
    }
}
