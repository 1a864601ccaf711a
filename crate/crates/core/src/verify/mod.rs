//! Fixed-seed verification batteries with machine-readable reports.
//!
//! Every check derives its own seed from the suite seed and its name, so
//! checks are independent of one another and of their order. Reports carry
//! no timings and depend only on the suite, the budget and the seed.

mod bijection;
mod dimension;
mod fragmentation;
mod increasing;
mod uniform;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::GeomError;
use crate::labeling::LabelError;
use crate::measures::MeasureError;
use crate::rng::Seed;

pub const REPORT_SCHEMA: &str = "stackplane-verify-v1";

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("unknown suite {0:?} (expected bijection, fragmentation, uniform-limit, increasing-limit or dimension)")]
    UnknownSuite(String),
    #[error("unknown budget {0:?} (expected quick or full)")]
    UnknownBudget(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Geometry(#[from] GeomError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Bijection,
    Fragmentation,
    UniformLimit,
    IncreasingLimit,
    Dimension,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Bijection,
        Suite::Fragmentation,
        Suite::UniformLimit,
        Suite::IncreasingLimit,
        Suite::Dimension,
    ];
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Bijection => "bijection",
            Suite::Fragmentation => "fragmentation",
            Suite::UniformLimit => "uniform-limit",
            Suite::IncreasingLimit => "increasing-limit",
            Suite::Dimension => "dimension",
        })
    }
}

impl FromStr for Suite {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.to_string() == s)
            .ok_or_else(|| VerifyError::UnknownSuite(s.to_string()))
    }
}

/// Sample sizes: `Full` is the size the acceptance tolerances were set
/// for, `Quick` a smaller run with the same pass rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Budget {
    Quick,
    Full,
}

impl Budget {
    fn pick<T>(self, full: T, quick: T) -> T {
        match self {
            Budget::Full => full,
            Budget::Quick => quick,
        }
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Budget::Quick => "quick",
            Budget::Full => "full",
        })
    }
}

impl FromStr for Budget {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quick" => Ok(Budget::Quick),
            "full" => Ok(Budget::Full),
            _ => Err(VerifyError::UnknownBudget(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    /// One of the numbered acceptance criteria.
    Criterion,
    /// A documented property outside the numbered criteria.
    Property,
    /// Reported only; never fails.
    Diagnostic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub test_name: String,
    pub kind: CheckKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<String>,
    pub passed: bool,
    pub rule: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    pub n_samples: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
}

impl Check {
    fn new(test_name: &str, kind: CheckKind, criterion: Option<&str>, seed: Seed) -> Self {
        Check {
            test_name: test_name.to_string(),
            kind,
            criterion: criterion.map(str::to_string),
            passed: kind == CheckKind::Diagnostic,
            rule: String::new(),
            estimate: None,
            std_error: None,
            p_value: None,
            n_samples: 0,
            seed: seed.master,
            values: BTreeMap::new(),
        }
    }

    fn criterion(name: &str, c: &str, seed: Seed) -> Self {
        Self::new(name, CheckKind::Criterion, Some(c), seed)
    }

    fn property(name: &str, seed: Seed) -> Self {
        Self::new(name, CheckKind::Property, None, seed)
    }

    fn diagnostic(name: &str, seed: Seed) -> Self {
        Self::new(name, CheckKind::Diagnostic, None, seed)
    }

    fn rule(mut self, r: impl Into<String>) -> Self {
        self.rule = r.into();
        self
    }

    fn estimate(mut self, e: f64, se: Option<f64>) -> Self {
        self.estimate = Some(e);
        self.std_error = se;
        self
    }

    fn p(mut self, p: f64) -> Self {
        self.p_value = Some(p);
        self
    }

    fn samples(mut self, n: usize) -> Self {
        self.n_samples = n;
        self
    }

    fn value(mut self, k: &str, v: f64) -> Self {
        self.values.insert(k.to_string(), v);
        self
    }

    fn pass(mut self, ok: bool) -> Self {
        if self.kind != CheckKind::Diagnostic {
            self.passed = ok;
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema: String,
    pub suite: Suite,
    pub budget: Budget,
    pub seed: u64,
    pub passed: bool,
    pub failing: Vec<String>,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.test_name == name)
    }
}

/// Per-check seed.
fn check_seed(seed: u64, suite: Suite, name: &str) -> Seed {
    Seed::new(seed).derive(&format!("{suite}/{name}"))
}

pub fn run_suite(suite: Suite, budget: Budget, seed: u64) -> Result<SuiteReport, VerifyError> {
    let s = |name: &str| check_seed(seed, suite, name);
    let checks = match suite {
        Suite::Bijection => bijection::run(budget, &s)?,
        Suite::Fragmentation => fragmentation::run(budget, &s)?,
        Suite::UniformLimit => uniform::run(budget, &s)?,
        Suite::IncreasingLimit => increasing::run(budget, &s)?,
        Suite::Dimension => dimension::run(budget, &s)?,
    };
    let failing: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.test_name.clone())
        .collect();
    Ok(SuiteReport {
        schema: REPORT_SCHEMA.to_string(),
        suite,
        budget,
        seed,
        passed: failing.is_empty(),
        failing,
        checks,
    })
}

type SeedFor<'a> = &'a dyn Fn(&str) -> Seed;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.to_string().parse::<Suite>().unwrap(), s);
        }
        assert!("bijections".parse::<Suite>().is_err());
        assert_eq!("quick".parse::<Budget>().unwrap(), Budget::Quick);
        assert!("medium".parse::<Budget>().is_err());
    }

    #[test]
    fn check_seeds_differ() {
        let a = check_seed(1, Suite::Bijection, "x");
        assert_ne!(a, check_seed(1, Suite::Bijection, "y"));
        assert_ne!(a, check_seed(1, Suite::Dimension, "x"));
        assert_ne!(a, check_seed(2, Suite::Bijection, "x"));
    }
}
