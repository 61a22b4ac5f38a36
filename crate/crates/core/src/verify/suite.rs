use serde::Serialize;

use super::constants::{constants_report, ConstantsReport};
use super::Check;
use crate::config::Caps;
use crate::error::{Error, Result};
use crate::greedy::SearchBudget;
use crate::renorm::{renorm_bidemocratic, renorm_bidemocratic_greedy, renorm_democratic, renorm_greedy};
use crate::spaces::{NormDescriptor, SpaceSpec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SuiteOptions {
    /// Sampled `(x, m)` pairs per space.
    pub samples: usize,
    pub budget: SearchBudget,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            samples: 1000,
            budget: SearchBudget::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteEntry {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ConstantsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub source: String,
    pub eps: f64,
    pub entries: Vec<SuiteEntry>,
    /// Every check from every entry plus the construction-specific ones.
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

/// Errors that mean "this construction does not apply here" rather than a bug.
fn is_inapplicable(e: &Error) -> bool {
    matches!(
        e,
        Error::Precondition(_) | Error::Infeasible(_) | Error::CapExceeded { .. }
    )
}

/// Reports on the space and on each of its renormings.
pub fn theorem_suite(space: &NormDescriptor, eps: f64, opts: &SuiteOptions, caps: &Caps) -> Result<SuiteReport> {
    let source = SpaceSpec::from_descriptor(space).digest();
    let tol = caps.tolerance;
    let mut entries = Vec::new();
    let mut extra = Vec::new();
    let report = |s: &NormDescriptor| constants_report(s, opts.samples, &opts.budget, caps);

    let base = report(space)?;
    entries.push(SuiteEntry {
        label: "source".into(),
        report: Some(base),
        skipped: None,
    });

    let skip = |entries: &mut Vec<SuiteEntry>, extra: &mut Vec<Check>, label: &str, e: Error| -> Result<()> {
        if !is_inapplicable(&e) {
            return Err(e);
        }
        extra.push(Check::skipped(label, &source, e.to_string()));
        entries.push(SuiteEntry {
            label: label.into(),
            report: None,
            skipped: Some(e.to_string()),
        });
        Ok(())
    };

    match renorm_bidemocratic(space, caps) {
        Ok(r) => {
            let rep = report(&r)?;
            extra.push(Check::at_most(
                "bidemocratic-renorm-constant",
                &rep.space,
                rep.bidemocracy,
                1.0,
                tol,
            ));
            entries.push(SuiteEntry {
                label: "bidemocratic".into(),
                report: Some(rep),
                skipped: None,
            });
        }
        Err(e) => skip(&mut entries, &mut extra, "bidemocratic", e)?,
    }

    match renorm_democratic(space, eps, caps) {
        Ok((r, params, _)) => {
            let rep = report(&r)?;
            extra.push(Check::at_most(
                "democratic-renorm-constant",
                &rep.space,
                rep.democracy,
                1.0 + eps,
                tol,
            ));
            let c = params.c.unwrap_or(f64::INFINITY);
            let (lo, hi) = equivalence_ratios(space, &r, opts.samples, opts.budget.seed);
            extra.push(Check::at_least(
                "democratic-renorm-lower-equivalence",
                &rep.space,
                lo,
                1.0,
                tol,
            ));
            extra.push(Check::at_most(
                "democratic-renorm-upper-equivalence",
                &rep.space,
                hi,
                c,
                tol,
            ));
            entries.push(SuiteEntry {
                label: "democratic".into(),
                report: Some(rep),
                skipped: None,
            });
        }
        Err(e) => skip(&mut entries, &mut extra, "democratic", e)?,
    }

    match renorm_bidemocratic_greedy(space, eps, caps) {
        Ok(out) => {
            let rep = report(&out.composed)?;
            extra.push(Check::at_most(
                "bidemocratic-greedy-renorm-constant",
                &rep.space,
                rep.bidemocracy,
                1.0,
                tol,
            ));
            let inter = crate::greedy::property_A_constant_search(&out.intermediate, &opts.budget, caps)?;
            extra.push(Check::at_most(
                "bidemocratic-greedy-intermediate-property-a",
                &rep.space,
                inter.lower_bound,
                1.0 + eps,
                1e-6,
            ));
            if let Some(p) = &rep.property_a {
                extra.push(Check::at_most(
                    "bidemocratic-greedy-property-a",
                    &rep.space,
                    p.lower_bound,
                    (1.0 + eps) * (1.0 + eps),
                    1e-6,
                ));
            }
            entries.push(SuiteEntry {
                label: "bidemocratic-greedy".into(),
                report: Some(rep),
                skipped: None,
            });
        }
        Err(e) => skip(&mut entries, &mut extra, "bidemocratic-greedy", e)?,
    }

    match renorm_greedy(space, eps, caps) {
        Ok(out) => {
            let mut rep = report(&out.space)?;
            rep.flags.truncation_degenerate = out.params.flags.iter().any(|f| f == "truncation-degenerate");
            if let Some(p) = &rep.property_a {
                extra.push(Check::at_most(
                    "greedy-renorm-property-a",
                    &rep.space,
                    p.lower_bound,
                    1.0 + 4.0 * eps,
                    1e-6,
                ));
            }
            entries.push(SuiteEntry {
                label: "greedy".into(),
                report: Some(rep),
                skipped: None,
            });
        }
        Err(e) => skip(&mut entries, &mut extra, "greedy", e)?,
    }

    let mut checks: Vec<Check> = Vec::new();
    for e in &entries {
        if let Some(r) = &e.report {
            checks.extend(r.checks.iter().map(|c| Check {
                id: format!("{}:{}", e.label, c.id),
                ..c.clone()
            }));
        }
    }
    checks.extend(extra);
    let all_pass = checks.iter().all(Check::passed);
    Ok(SuiteReport {
        source,
        eps,
        entries,
        checks,
        all_pass,
    })
}

/// Smallest and largest `|||x||| / ||x||` over seeded random vectors.
pub(crate) fn equivalence_ratios(old: &NormDescriptor, new: &NormDescriptor, samples: usize, seed: u64) -> (f64, f64) {
    use rand::SeedableRng;
    let n = old.dim();
    let ratios = crate::par::map_range(samples, |r| {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xe9u64.rotate_left(40) ^ r as u64);
        let x = crate::greedy::random_vector(&mut rng, n);
        let o = old.value(x.as_slice());
        if o == 0.0 {
            1.0
        } else {
            new.value(x.as_slice()) / o
        }
    });
    ratios
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l2_suite_passes() {
        let caps = Caps::default();
        let opts = SuiteOptions {
            samples: 300,
            budget: SearchBudget {
                refinements: 200,
                ..Default::default()
            },
        };
        let r = theorem_suite(&NormDescriptor::lp(6, 2.0), 1.0, &opts, &caps).unwrap();
        let fails: Vec<_> = r.checks.iter().filter(|c| !c.passed()).collect();
        assert!(r.all_pass, "{fails:?}");
        let src = r.entries[0].report.as_ref().unwrap();
        assert!((src.greedy_lower - 1.0).abs() < 1e-9 && (src.greedy_upper - 2.0).abs() < 1e-12);
    }
}
