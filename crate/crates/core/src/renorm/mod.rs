//! Renormings: each returns a new descriptor plus the parameters it chose.

mod bidemocratic;
mod democratic;
mod flat;
mod greedy;

pub use bidemocratic::{renorm_bidemocratic, renorm_bidemocratic_greedy, BidemocraticGreedy};
pub use democratic::renorm_democratic;
pub use flat::{
    extract_flat_subset, extraction_delta, flat_family, AdmissibleFamily, ExtractionStep, ExtractionTrace, FlatContext,
};
pub use greedy::{choose_m, renorm_greedy, GreedyRenorm};

use serde::{Deserialize, Serialize};

use crate::config::Caps;
use crate::error::{Error, Result};
use crate::fundfn::{FundamentalFunction, IndicatorNorms};
use crate::spaces::{NormDescriptor, Provenance, SpaceSpec};

/// Parameters of a construction; fields a construction does not use are `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenormParams {
    pub eps: f64,
    /// Democracy constant of the source space.
    pub democracy: f64,
    pub q: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    /// Threshold used when extracting flat subsets.
    pub delta: Option<f64>,
    pub m: Option<usize>,
    pub psi: Option<FundamentalFunction>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub n0: Option<usize>,
    pub s: Option<f64>,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    /// Value of `|||e_i|||` before the final rescaling.
    pub unit_value: Option<f64>,
    pub flags: Vec<String>,
}

impl RenormParams {
    pub(crate) fn new(eps: f64, democracy: f64) -> Self {
        Self {
            eps,
            democracy,
            q: None,
            c: None,
            delta: None,
            m: None,
            psi: None,
            a: None,
            b: None,
            n0: None,
            s: None,
            l: None,
            unit_value: None,
            flags: Vec::new(),
        }
    }

    /// Checks the relations between the parameters that are set.
    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Invariant(m));
        let tol = 1e-12;
        if let Some(q) = self.q {
            if !(q > 0.0 && q < 1.0) {
                return bad(format!("q = {q} outside (0, 1)"));
            }
            if let Some(c) = self.c {
                if c <= self.democracy / (q * (1.0 - q)) {
                    return bad(format!("C = {c} not above Delta/(q(1-q))"));
                }
            }
        }
        if let Some(m) = self.m {
            if m < 2 || m as f64 / (m - 1) as f64 > 1.0 + self.eps + tol {
                return bad(format!("m = {m} does not satisfy m/(m-1) <= 1 + eps"));
            }
        }
        if let (Some(s), Some(a)) = (self.s, self.a) {
            if (s - self.eps * a / (1.0 + self.eps)).abs() > tol * s.max(1.0) {
                return bad(format!("s = {s} inconsistent with a = {a}"));
            }
        }
        if let (Some(l), Some(m), Some(psi)) = (self.l, self.m, &self.psi) {
            if (l - m as f64 * psi.eval(1.0) / self.eps).abs() > tol * l.max(1.0) {
                return bad(format!("L = {l} inconsistent with m and psi(1)"));
            }
        }
        if let Some(n0) = self.n0 {
            if n0 as f64 <= 1.0 / self.eps {
                return bad(format!("n0 = {n0} not above 1/eps"));
            }
        }
        Ok(())
    }
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("eps must be positive and finite, got {eps}")))
    }
}

/// Requires a 1-unconditional space whose unit vectors have norm 1.
pub(crate) fn require_normalized(space: &NormDescriptor, table: &IndicatorNorms, caps: &Caps) -> Result<()> {
    if !space.is_unconditional() {
        return Err(Error::Precondition(format!(
            "{} is not certified 1-unconditional",
            space.variant_name()
        )));
    }
    for i in 0..space.dim() {
        let v = table.get(crate::spaces::IndexSet::singleton(i));
        if (v - 1.0).abs() > caps.tolerance {
            return Err(Error::Precondition(format!(
                "basis is not normalized: ||e_{}|| = {v}",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Provenance block for `result` built from `source`.
pub fn provenance(construction: &str, source: &NormDescriptor, params: &RenormParams) -> Provenance {
    Provenance {
        construction: construction.to_string(),
        source_digest: SpaceSpec::from_descriptor(source).digest(),
        params: serde_json::to_value(params).unwrap_or(serde_json::Value::Null),
    }
}
