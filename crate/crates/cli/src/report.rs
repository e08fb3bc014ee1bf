//! Run reports.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// One check. A measured value always travels with its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relation: Option<Relation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    /// Passes when `value <= tolerance`. NaN fails.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::measured(name, value, tolerance, Relation::AtMost, value <= tolerance)
    }

    /// Passes when `value >= tolerance`. NaN fails.
    pub fn at_least(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::measured(name, value, tolerance, Relation::AtLeast, value >= tolerance)
    }

    fn measured(name: impl Into<String>, value: f64, tolerance: f64, relation: Relation, passed: bool) -> Self {
        Self { name: name.into(), passed, value: Some(value), tolerance: Some(tolerance), relation: Some(relation), detail: None }
    }

    pub fn flag(name: impl Into<String>, passed: bool) -> Self {
        Self { name: name.into(), passed, value: None, tolerance: None, relation: None, detail: None }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", if self.passed { "PASS" } else { "FAIL" }, self.name)?;
        if let (Some(v), Some(t), Some(rel)) = (self.value, self.tolerance, self.relation) {
            let op = match rel {
                Relation::AtMost => "<=",
                Relation::AtLeast => ">=",
            };
            write!(f, ": {v:e} {op} {t:e}")?;
        }
        if let Some(d) = &self.detail {
            write!(f, " ({d})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_digest: Option<String>,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Informational values that are not tested against anything.
    pub quantities: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl RunReport {
    pub fn new(command: &str, input_digest: Option<String>) -> Self {
        Self {
            command: command.into(),
            input_digest,
            passed: true,
            checks: Vec::new(),
            quantities: BTreeMap::new(),
            warnings: Vec::new(),
            wall_time_s: None,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    pub fn quantity(&mut self, name: impl Into<String>, value: f64) {
        self.quantities.insert(name.into(), value);
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}", self.command, if self.passed { "pass" } else { "FAIL" })?;
        for c in &self.checks {
            writeln!(f, "  {c}")?;
        }
        for (k, v) in &self.quantities {
            writeln!(f, "  {k} = {v}")?;
        }
        for w in &self.warnings {
            writeln!(f, "  warning: {w}")?;
        }
        if let Some(t) = self.wall_time_s {
            writeln!(f, "  wall time {t:.3} s")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failing_check_fails_report() {
        let mut r = RunReport::new("check", None);
        r.push(Check::at_most("a", 1e-12, 1e-9));
        assert!(r.passed);
        r.push(Check::at_least("b", f64::NAN, 0.0));
        assert!(!r.passed);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"relation\":\"<=\""));
        assert!(!json.contains("wall_time"));
    }
}
