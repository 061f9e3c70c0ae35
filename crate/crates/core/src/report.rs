//! Structured verdicts and limit estimates shared by every check.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Inconclusive,
    Fail,
}

impl Verdict {
    /// The worse of two verdicts (fail > inconclusive > pass).
    pub fn and(self, other: Verdict) -> Verdict {
        self.max(other)
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Fail => "fail",
        })
    }
}

/// Outcome of one axiom or identity check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub verdict: Verdict,
    /// Measured residuals with the tolerance they were held to.
    pub bounds: BTreeMap<String, Bound>,
    /// Informational scalars.
    pub metrics: BTreeMap<String, f64>,
    pub series: BTreeMap<String, Vec<f64>>,
    pub notes: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub value: f64,
    pub tolerance: f64,
}

impl CheckReport {
    pub fn new(name: impl Into<String>) -> Self {
        CheckReport {
            name: name.into(),
            verdict: Verdict::Pass,
            bounds: BTreeMap::new(),
            metrics: BTreeMap::new(),
            series: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    /// Records `value <= tolerance`; a violation (or NaN) fails the check.
    pub fn bound(&mut self, key: &str, value: f64, tolerance: f64) -> bool {
        self.bounds.insert(key.to_string(), Bound { value, tolerance });
        let ok = value <= tolerance;
        if !ok {
            self.verdict = self.verdict.and(Verdict::Fail);
        }
        ok
    }

    /// Records `value >= floor` as the bound `floor - value <= 0`.
    pub fn at_least(&mut self, key: &str, value: f64, floor: f64) -> bool {
        self.metrics.insert(key.to_string(), value);
        self.bound(&format!("{key}_shortfall"), floor - value, 0.0)
    }

    pub fn metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.to_string(), value);
    }

    pub fn series(&mut self, key: &str, values: Vec<f64>) {
        self.series.insert(key.to_string(), values);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn fail(&mut self, reason: impl Into<String>) {
        self.verdict = self.verdict.and(Verdict::Fail);
        self.notes.push(reason.into());
    }

    pub fn inconclusive(&mut self, reason: impl Into<String>) {
        self.verdict = self.verdict.and(Verdict::Inconclusive);
        self.notes.push(reason.into());
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Largest recorded bound value (0 when none).
    pub fn max_residual(&self) -> f64 {
        self.bounds.values().map(|b| b.value).fold(0.0, f64::max)
    }

    pub fn value(&self, key: &str) -> Option<f64> {
        self.bounds.get(key).map(|b| b.value).or_else(|| self.metrics.get(key).copied())
    }
}

/// A finite-scale reading of a limiting quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub value: f64,
    pub window_values: Vec<f64>,
    /// Relative change of the reading per doubling of the scale parameter.
    pub trend_slope: f64,
    pub converged: bool,
    pub stderr: f64,
    pub diagnostics: BTreeMap<String, f64>,
}

pub type AsymptoticEstimate = LimitEstimate;

impl LimitEstimate {
    pub fn exact(value: f64) -> Self {
        LimitEstimate {
            value,
            window_values: vec![value],
            trend_slope: 0.0,
            converged: true,
            stderr: 0.0,
            diagnostics: BTreeMap::new(),
        }
    }
}

/// Ordinary least squares y = a + b x; returns (a, b, stderr of b).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return (my, 0.0, f64::INFINITY);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let stderr = if x.len() > 2 { (sse / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    (intercept, slope, stderr)
}
