use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

/// Default scale-relative violation tolerance for the one-dimensional estimates.
pub const DEFAULT_TOL: f64 = 1e-6;

/// How a row's slack is normalised before comparing against the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// `slack ≥ −tol·(1+|RHS|)`.
    Rhs,
    /// `slack ≥ −tol·(1+max(|LHS|,|RHS|))`.
    MaxSide,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub tol: f64,
    pub scale: Scale,
}

impl Tolerance {
    pub fn rhs(tol: f64) -> Self {
        Tolerance {
            tol,
            scale: Scale::Rhs,
        }
    }

    pub fn max_side(tol: f64) -> Self {
        Tolerance {
            tol,
            scale: Scale::MaxSide,
        }
    }

    fn denominator(&self, lhs: f64, rhs: f64) -> f64 {
        let s = match self.scale {
            Scale::Rhs => rhs.abs(),
            Scale::MaxSide => lhs.abs().max(rhs.abs()),
        };
        if s.is_finite() {
            1.0 + s
        } else {
            1.0
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::rhs(DEFAULT_TOL)
    }
}

/// One evaluation point of an inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub point: Vec<f64>,
    #[serde(with = "ext_f64")]
    pub lhs: f64,
    #[serde(with = "ext_f64")]
    pub rhs: f64,
    #[serde(with = "ext_f64")]
    pub slack: f64,
    #[serde(with = "ext_f64")]
    pub scaled_slack: f64,
    /// Rows marked informational are reported but do not decide `pass`.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub informational: bool,
}

/// Structured record of an inequality check.
///
/// `pass` holds exactly when `worst_slack ≥ −tolerance.tol`, where `worst_slack`
/// is the minimum of the scale-normalised slacks over all deciding rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    /// Names of the coordinates in each row's `point`.
    pub grid: Vec<String>,
    #[serde(with = "ext_f64")]
    pub worst_slack: f64,
    pub pass: bool,
    pub tolerance: Tolerance,
    pub runtime_ms: f64,
    pub details: Vec<ReportRow>,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// One line per row: the grid coordinates followed by lhs, rhs, slack, scaled_slack.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for g in &self.grid {
            out.push_str(g);
            out.push(',');
        }
        out.push_str("lhs,rhs,slack,scaled_slack,informational\n");
        for row in &self.details {
            for p in &row.point {
                let _ = write!(out, "{p},");
            }
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                row.lhs, row.rhs, row.slack, row.scaled_slack, row.informational as u8
            );
        }
        out
    }

    /// Merge several reports into one summarising report; passes iff all pass.
    pub fn combine(name: &str, parts: &[VerificationReport]) -> VerificationReport {
        let mut b = ReportBuilder::new(name, &["part", "row"]);
        if let Some(first) = parts.first() {
            b.tolerance = first.tolerance;
        }
        let mut worst = f64::INFINITY;
        let mut pass = true;
        for (k, part) in parts.iter().enumerate() {
            pass &= part.pass;
            worst = worst.min(part.worst_slack);
            for (r, row) in part.details.iter().enumerate() {
                let mut row = row.clone();
                row.point = vec![k as f64, r as f64];
                b.rows.push(row);
            }
        }
        let mut rep = b.finish();
        rep.pass = pass;
        rep.worst_slack = worst;
        rep
    }
}

/// Accumulates rows of a check and computes the verdict.
#[derive(Debug)]
pub struct ReportBuilder {
    name: String,
    grid: Vec<String>,
    params: BTreeMap<String, f64>,
    pub tolerance: Tolerance,
    rows: Vec<ReportRow>,
    started: Instant,
}

impl ReportBuilder {
    pub fn new(name: &str, grid: &[&str]) -> Self {
        ReportBuilder {
            name: name.to_string(),
            grid: grid.iter().map(|s| s.to_string()).collect(),
            params: BTreeMap::new(),
            tolerance: Tolerance::default(),
            rows: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn tolerance(mut self, tol: Tolerance) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn set_param(&mut self, key: &str, value: f64) {
        self.params.insert(key.to_string(), value);
    }

    /// Records `lhs ≤ rhs` at `point`.
    pub fn push(&mut self, point: Vec<f64>, lhs: f64, rhs: f64) {
        self.push_row(point, lhs, rhs, false);
    }

    pub fn push_informational(&mut self, point: Vec<f64>, lhs: f64, rhs: f64) {
        self.push_row(point, lhs, rhs, true);
    }

    fn push_row(&mut self, point: Vec<f64>, lhs: f64, rhs: f64, informational: bool) {
        let slack = if rhs == f64::INFINITY || lhs == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            rhs - lhs
        };
        let scaled_slack = if slack.is_finite() {
            slack / self.tolerance.denominator(lhs, rhs)
        } else {
            slack
        };
        self.rows.push(ReportRow {
            point,
            lhs,
            rhs,
            slack,
            scaled_slack,
            informational,
        });
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn finish(self) -> VerificationReport {
        let worst_slack = self
            .rows
            .iter()
            .filter(|r| !r.informational)
            .map(|r| {
                if r.scaled_slack.is_nan() {
                    f64::NEG_INFINITY
                } else {
                    r.scaled_slack
                }
            })
            .fold(f64::INFINITY, f64::min);
        let pass = worst_slack >= -self.tolerance.tol;
        VerificationReport {
            name: self.name,
            params: self.params,
            grid: self.grid,
            worst_slack,
            pass,
            tolerance: self.tolerance,
            runtime_ms: self.started.elapsed().as_secs_f64() * 1e3,
            details: self.rows,
        }
    }
}

/// Serialises non-finite floats as the strings `"inf"`, `"-inf"`, `"nan"`.
pub(crate) mod ext_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("bad float {other:?}"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_uses_scaled_slack() {
        let mut b = ReportBuilder::new("x", &["t"]).tolerance(Tolerance::rhs(1e-6));
        b.push(vec![0.0], 1.0 + 1e-7, 1.0);
        b.push(vec![1.0], 0.0, f64::INFINITY);
        let rep = b.finish();
        assert!(rep.pass);
        assert!(rep.worst_slack < 0.0);

        let mut b = ReportBuilder::new("x", &["t"]).tolerance(Tolerance::rhs(1e-6));
        b.push(vec![0.0], 1.0 + 1e-5, 1.0);
        b.push_informational(vec![1.0], 5.0, 1.0);
        let rep = b.finish();
        assert!(!rep.pass);
        assert!((rep.worst_slack + 0.5e-5).abs() < 1e-12);
    }

    #[test]
    fn report_json_reparses() {
        let mut b = ReportBuilder::new("roundtrip", &["t", "theta"]).param("N", 3.0);
        b.push(vec![0.5, 1.0], -1.0, f64::INFINITY);
        let rep = b.finish();
        let back: VerificationReport = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(back, rep);
        assert!(rep.to_csv().starts_with("t,theta,lhs"));
    }
}
