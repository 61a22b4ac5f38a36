//! Sets `A` whose normalized indicator `(phi(|A|)/|A|) 1_A` has dual norm at
//! most `C`, and the iteration that extracts one from any `E` with
//! `|A| >= q|E|`.

use serde::Serialize;

use crate::config::Caps;
use crate::error::{Error, Result};
use crate::fundfn::{FundamentalFunction, IndicatorNorms};
use crate::par;
use crate::spaces::{
    norming_functional, CoefVector, DualOracle, IndexSet, NormDescriptor, NormingCertificate, SetFamily,
};

/// Smallest dyadic `delta` with `C > (1 + delta) Delta / (delta q (1 - q))`,
/// preferring `delta = 1` whenever it qualifies.
pub fn extraction_delta(c: f64, democracy: f64, q: f64) -> Result<f64> {
    let slack = c * q * (1.0 - q) - democracy;
    if slack <= 0.0 {
        return Err(Error::Precondition(format!(
            "C = {c} must exceed Delta/(q(1-q)) = {}",
            democracy / (q * (1.0 - q))
        )));
    }
    // Admissible exactly when delta > Delta / slack.
    let threshold = democracy / slack;
    let mut delta = 1.0f64;
    if delta > threshold {
        return Ok(delta);
    }
    while delta <= threshold {
        delta *= 2.0;
    }
    Ok(delta)
}

#[derive(Clone, Debug, Serialize)]
pub struct AdmissibleFamily {
    pub sets: SetFamily,
    #[serde(rename = "C")]
    pub c: f64,
    pub q: f64,
    pub phi: FundamentalFunction,
    /// Upper end of the dual-norm bracket of `(phi(|A|)/|A|) 1_A`, per member.
    pub dual_values: Vec<f64>,
}

/// One iteration, possibly repeated: while `F` is unchanged the norming
/// functional is the same, so consecutive identical steps are stored once.
#[derive(Clone, Debug, Serialize)]
pub struct ExtractionStep {
    pub f: IndexSet,
    pub z: NormingCertificate,
    pub e: IndexSet,
    pub repeats: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtractionTrace {
    pub steps: Vec<ExtractionStep>,
    pub a: IndexSet,
    pub delta: f64,
    /// Total number of iterations (sum of repeats).
    pub step_count: usize,
    /// `(1 + delta) Delta / (1 - q) * n / phi(n)`.
    pub step_bound: f64,
    /// Upper bound on the dual norm of `(phi(|A|)/|A|) 1_A`.
    pub dual_value: f64,
}

/// Precomputed data shared by every extraction on one space.
pub struct FlatContext<'a> {
    space: &'a NormDescriptor,
    oracle: DualOracle<'a>,
    /// `phi(k)` at index `k - 1`.
    pub phi: Vec<f64>,
    pub democracy: f64,
    pub q: f64,
    pub c: f64,
    pub delta: f64,
}

impl<'a> FlatContext<'a> {
    pub fn new(space: &'a NormDescriptor, q: f64, c: f64, caps: &Caps) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::OutOfRange(format!("q must lie in (0, 1), got {q}")));
        }
        if !space.is_unconditional() {
            return Err(Error::Precondition(format!(
                "{} is not certified 1-unconditional",
                space.variant_name()
            )));
        }
        let table = IndicatorNorms::compute(space, caps)?;
        let democracy = table.democracy();
        let delta = extraction_delta(c, democracy, q)?;
        Ok(Self {
            space,
            oracle: DualOracle::new(space),
            phi: table.phi(),
            democracy,
            q,
            c,
            delta,
        })
    }

    fn weight(&self, k: usize) -> f64 {
        self.phi[k - 1] / k as f64
    }

    /// Upper end of the dual-norm bracket of `(phi(|A|)/|A|) 1_A`.
    pub fn dual_value(&self, a: IndexSet) -> Result<f64> {
        let n = self.space.dim();
        let b = self.oracle.bracket(&CoefVector::indicator(n, a))?;
        Ok(self.weight(a.len()) * b.upper)
    }

    /// Every member, with exhaustive verification that each `E` contains
    /// one of size at least `q|E|`.
    pub fn family(&self, caps: &Caps) -> Result<AdmissibleFamily> {
        let n = self.space.dim();
        let total = 1usize << n;
        let values = par::map_range(total, |mask| {
            if mask == 0 {
                Ok(f64::INFINITY)
            } else {
                self.dual_value(IndexSet(mask as u64))
            }
        });
        let mut member = vec![false; total];
        let mut sets = Vec::new();
        let mut dual_values = Vec::new();
        for (mask, v) in values.into_iter().enumerate() {
            let v = v?;
            if v <= self.c + caps.tolerance {
                member[mask] = true;
                sets.push(IndexSet(mask as u64));
                dual_values.push(v);
            }
        }
        // largest[E]: size of the largest member inside E.
        let mut largest = vec![0usize; total];
        for mask in 1..total {
            let mut best = if member[mask] { mask.count_ones() as usize } else { 0 };
            let mut rest = mask;
            while rest != 0 {
                let bit = rest & rest.wrapping_neg();
                best = best.max(largest[mask & !bit]);
                rest &= rest - 1;
            }
            largest[mask] = best;
            let size = mask.count_ones() as f64;
            if (best as f64) < self.q * size - 1e-12 {
                return Err(Error::Invariant(format!(
                    "{} contains no member of size >= {}",
                    IndexSet(mask as u64),
                    self.q * size
                )));
            }
        }
        Ok(AdmissibleFamily {
            sets: SetFamily::new(n, sets)?,
            c: self.c,
            q: self.q,
            phi: FundamentalFunction::grid(self.phi.clone())?,
            dual_values,
        })
    }

    pub fn extract(&self, e: IndexSet) -> Result<ExtractionTrace> {
        let dim = self.space.dim();
        if !e.is_subset(IndexSet::full(dim)) {
            return Err(Error::OutOfRange(format!("{e} is not a subset of 1..{dim}")));
        }
        let n = e.len();
        if n == 0 {
            return Ok(ExtractionTrace {
                steps: Vec::new(),
                a: e,
                delta: self.delta,
                step_count: 0,
                step_bound: 0.0,
                dual_value: 0.0,
            });
        }
        let step_bound = (1.0 + self.delta) * self.democracy / (1.0 - self.q) * n as f64 / self.phi[n - 1];
        let floor = (1.0 - self.q) * n as f64;
        let mut cum = vec![0.0f64; dim];
        let mut f = e;
        let mut steps: Vec<ExtractionStep> = Vec::new();
        let mut count = 0usize;
        while (f.len() as f64) >= floor {
            let z = norming_functional(self.space, &CoefVector::indicator(dim, f))?;
            let zs = z.functional.as_slice();
            if zs.iter().any(|v| *v < -1e-12) {
                return Err(Error::Invariant(format!(
                    "norming functional of 1_{f} is not nonnegative"
                )));
            }
            if (0..dim).any(|i| !f.contains(i) && zs[i].abs() > 1e-12) {
                return Err(Error::Invariant(format!("norming functional of 1_{f} leaves the set")));
            }
            if zs.iter().all(|v| *v <= 0.0) {
                return Err(Error::Invariant(format!("norming functional of 1_{f} vanishes on it")));
            }
            let mut repeats = 0usize;
            let picked = loop {
                for i in f.iter() {
                    cum[i] += zs[i].max(0.0);
                }
                repeats += 1;
                count += 1;
                let picked = IndexSet::from_indices(f.iter().filter(|&i| cum[i] >= self.delta));
                if !picked.is_empty() {
                    break picked;
                }
                if count as f64 > step_bound {
                    break picked;
                }
            };
            f = f.difference(picked);
            steps.push(ExtractionStep {
                f: f.union(picked),
                z,
                e: picked,
                repeats,
            });
            if count as f64 > step_bound {
                return Err(Error::Invariant(format!(
                    "extraction from {e} exceeded the step bound {step_bound}"
                )));
            }
        }
        let a = e.difference(f);
        let dual_value = self.dual_value(a)?;
        Ok(ExtractionTrace {
            steps,
            a,
            delta: self.delta,
            step_count: count,
            step_bound,
            dual_value,
        })
    }
}

pub fn flat_family(space: &NormDescriptor, q: f64, c: f64, caps: &Caps) -> Result<AdmissibleFamily> {
    FlatContext::new(space, q, c, caps)?.family(caps)
}

pub fn extract_flat_subset(
    space: &NormDescriptor,
    e: IndexSet,
    q: f64,
    c: f64,
    caps: &Caps,
) -> Result<ExtractionTrace> {
    FlatContext::new(space, q, c, caps)?.extract(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c_for(democracy: f64, q: f64) -> f64 {
        1.01 * democracy / (q * (1.0 - q))
    }

    #[test]
    fn delta_choice() {
        assert_eq!(extraction_delta(c_for(1.0, 0.5), 1.0, 0.5).unwrap(), 128.0);
        assert_eq!(extraction_delta(10.0, 1.0, 0.5).unwrap(), 1.0);
        assert!(extraction_delta(3.9, 1.0, 0.5).is_err());
        // The chosen delta satisfies the strict inequality.
        for (d, q) in [(1.0, 0.5), (2.0, 0.25), (1.7, 2.0 / 3.0)] {
            let c = c_for(d, q);
            let delta = extraction_delta(c, d, q).unwrap();
            assert!(c > (1.0 + delta) * d / (delta * q * (1.0 - q)));
            assert!(delta == 1.0 || c <= (1.0 + delta / 2.0) * d / (delta / 2.0 * q * (1.0 - q)));
        }
    }

    #[test]
    fn l1_keeps_everything() {
        let caps = Caps::default();
        let s = NormDescriptor::lp(5, 1.0);
        let fam = flat_family(&s, 0.5, c_for(1.0, 0.5), &caps).unwrap();
        assert_eq!(fam.sets.len(), 31);
        let e = IndexSet::from_indices([0, 2, 3]);
        let t = extract_flat_subset(&s, e, 0.5, 10.0, &caps).unwrap();
        assert_eq!(t.a, e);
        assert_eq!(t.step_count, 1);
    }

    #[test]
    fn linf_keeps_everything() {
        let caps = Caps::default();
        let s = NormDescriptor::lp(5, f64::INFINITY);
        let fam = flat_family(&s, 0.5, c_for(1.0, 0.5), &caps).unwrap();
        assert_eq!(fam.sets.len(), 31);
        for v in fam.dual_values {
            assert!((v - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn l2_nine_extracts_half() {
        let caps = Caps::default();
        let s = NormDescriptor::lp(9, 2.0);
        let (q, c) = (0.5, c_for(1.0, 0.5));
        let t = extract_flat_subset(&s, IndexSet::full(9), q, c, &caps).unwrap();
        assert!(t.a.len() >= 5);
        assert!(t.dual_value <= c);
        assert!(t.step_count as f64 <= t.step_bound);
    }

    #[test]
    fn tsirelson_extraction_is_a_member() {
        let caps = Caps::default();
        let s = crate::spaces::tsirelson_materialize(8, &caps).unwrap();
        let d = crate::fundfn::democracy_constant(&s, &caps).unwrap();
        let ctx = FlatContext::new(&s, 0.5, c_for(d, 0.5), &caps).unwrap();
        let fam = ctx.family(&caps).unwrap();
        for mask in [0b1111_1111u64, 0b1010_1010, 0b0000_0111] {
            let t = ctx.extract(IndexSet(mask)).unwrap();
            assert!(fam.sets.sets.contains(&t.a));
            assert!(t.a.len() as f64 >= 0.5 * mask.count_ones() as f64);
        }
    }
}
