//! Constants reports and conformance suites. Failed checks are recorded with
//! a witness rather than aborting the run.

mod constants;
mod suite;

pub use constants::{
    constants_report, greedy_bound_check, unconditional_certificates, ConstantsReport, ReportFlags,
    UnconditionalCertificates,
};
pub use suite::{theorem_suite, SuiteEntry, SuiteOptions, SuiteReport};

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// One inequality `value <= bound` (or `>=`, see `id`), with a witness on failure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub space: String,
    pub value: f64,
    pub bound: f64,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    /// `value <= bound + tol`.
    pub fn at_most(id: &str, space: &str, value: f64, bound: f64, tol: f64) -> Self {
        Self::new(id, space, value, bound, value <= bound + tol)
    }

    /// `value >= bound - tol`.
    pub fn at_least(id: &str, space: &str, value: f64, bound: f64, tol: f64) -> Self {
        Self::new(id, space, value, bound, value >= bound - tol)
    }

    pub fn new(id: &str, space: &str, value: f64, bound: f64, pass: bool) -> Self {
        Self {
            id: id.to_string(),
            space: space.to_string(),
            value,
            bound,
            status: if pass { Status::Pass } else { Status::Fail },
            witness: None,
            note: None,
        }
    }

    pub fn skipped(id: &str, space: &str, reason: String) -> Self {
        Self {
            id: id.to_string(),
            space: space.to_string(),
            value: f64::NAN,
            bound: f64::NAN,
            status: Status::Skipped,
            witness: None,
            note: Some(reason),
        }
    }

    pub fn with_witness(mut self, w: serde_json::Value) -> Self {
        if self.status == Status::Fail {
            self.witness = Some(w);
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    id: &'a str,
    space: &'a str,
    value: f64,
    bound: f64,
    pass: &'a str,
}

/// One row per check: `id,space,value,bound,pass`.
pub fn checks_to_csv(checks: &[Check]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in checks {
        w.serialize(CsvRow {
            id: &c.id,
            space: &c.space,
            value: c.value,
            bound: c.bound,
            pass: match c.status {
                Status::Pass => "true",
                Status::Fail => "false",
                Status::Skipped => "skipped",
            },
        })
        .map_err(|e| crate::error::Error::Parse(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| crate::error::Error::Parse(e.to_string()))?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}
