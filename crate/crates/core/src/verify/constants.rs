use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Check;
use crate::config::Caps;
use crate::error::Result;
use crate::fundfn::{bidemocracy_constant, dual_fundamental_function, IndicatorNorms};
use crate::greedy::{
    greedy_approximant, property_A_constant_search, random_vector, sigma_m, PropertyASearch, SearchBudget,
};
use crate::par;
use crate::spaces::{NormDescriptor, SpaceSpec};

/// Sampled suppression and unconditional ratios, plus the bounds used in
/// `C <= K_S + K_U^2 Delta`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnconditionalCertificates {
    /// Largest sampled `||P_A x|| / ||x||`.
    pub k_s_sampled: f64,
    /// Largest sampled `||sum eps_i x_i e_i|| / ||x||`.
    pub k_u_sampled: f64,
    pub k_s_bound: f64,
    pub k_u_bound: f64,
    /// Largest per-vector `K_S(x) - K_U(x)`; nonpositive by construction.
    pub ks_minus_ku: f64,
    /// Largest per-vector `K_U(x) - 2 K_S(x)`; nonpositive by construction.
    pub ku_minus_2ks: f64,
    pub source: String,
}

/// Above this dimension subsets and signs are sampled instead of enumerated.
const FULL_SIGN_DIM: usize = 10;
const SIGN_SAMPLES: usize = 512;

pub fn unconditional_certificates(space: &NormDescriptor, samples: usize, seed: u64) -> UnconditionalCertificates {
    let n = space.dim();
    let per = par::map_range(samples, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0000 ^ r as u64);
        let x = random_vector(&mut rng, n);
        let norm = space.value(x.as_slice());
        if norm == 0.0 {
            return (1.0, 1.0);
        }
        let masks: Vec<u64> = if n <= FULL_SIGN_DIM {
            (0..1u64 << n).collect()
        } else {
            (0..SIGN_SAMPLES)
                .map(|_| rng.gen::<u64>() & ((1u64 << n) - 1))
                .collect()
        };
        let mut ks = 0.0f64;
        let mut ku = 0.0f64;
        let mut buf = vec![0.0; n];
        for &mask in &masks {
            for i in 0..n {
                buf[i] = if mask >> i & 1 == 1 { x[i] } else { 0.0 };
            }
            ks = ks.max(space.value(&buf) / norm);
            for i in 0..n {
                buf[i] = if mask >> i & 1 == 1 { x[i] } else { -x[i] };
            }
            ku = ku.max(space.value(&buf) / norm);
        }
        (ks, ku)
    });
    let mut out = UnconditionalCertificates {
        k_s_sampled: 0.0,
        k_u_sampled: 0.0,
        k_s_bound: 1.0,
        k_u_bound: 1.0,
        ks_minus_ku: f64::NEG_INFINITY,
        ku_minus_2ks: f64::NEG_INFINITY,
        source: "1-unconditional by construction".into(),
    };
    for (ks, ku) in per {
        out.k_s_sampled = out.k_s_sampled.max(ks);
        out.k_u_sampled = out.k_u_sampled.max(ku);
        out.ks_minus_ku = out.ks_minus_ku.max(ks - ku);
        out.ku_minus_2ks = out.ku_minus_2ks.max(ku - 2.0 * ks);
    }
    if let NormDescriptor::HaarLp { p, .. } = space {
        // Martingale transform bound for the Haar system in L_p.
        let q = p / (p - 1.0);
        let k = p.max(q) - 1.0;
        out.k_s_bound = k;
        out.k_u_bound = k;
        out.source = "martingale transform bound max(p, p') - 1".into();
    }
    out
}

/// Samples `(x, m)` and checks `||x - G_m x|| <= C sigma_m(x)`. Returns the
/// check and the largest ratio seen.
pub fn greedy_bound_check(
    space: &NormDescriptor,
    digest: &str,
    bound: f64,
    samples: usize,
    seed: u64,
    caps: &Caps,
) -> Result<(Check, f64)> {
    let n = space.dim();
    let results = par::map_range(samples, |r| -> Result<(f64, f64, f64, Vec<f64>, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
        let x = random_vector(&mut rng, n);
        let m = rng.gen_range(0..=n);
        let num = space.norm(&x.sub(&greedy_approximant(&x, m)?))?;
        let sig = sigma_m(space, &x, m, caps)?;
        let ratio = if sig > 0.0 {
            num / sig
        } else if num > 0.0 {
            f64::INFINITY
        } else {
            1.0
        };
        Ok((ratio, num, sig, x.into_inner(), m))
    });
    let mut worst = 1.0f64;
    let mut violation: Option<serde_json::Value> = None;
    let mut violations = 0usize;
    for r in results {
        let (ratio, num, sig, x, m) = r?;
        worst = worst.max(ratio);
        if num > bound * sig + caps.tolerance * sig.max(1.0) {
            violations += 1;
            if violation.is_none() {
                violation = Some(serde_json::json!({ "x": x, "m": m, "error": num, "sigma": sig }));
            }
        }
    }
    let mut check = Check::new("greedy-error-bound", digest, worst, bound, violations == 0);
    if let Some(w) = violation {
        check = check.with_witness(w);
        check.note = Some(format!("{violations} of {samples} samples violate the bound"));
    }
    Ok((check, worst))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ReportFlags {
    pub suppression_one_verified: bool,
    pub truncation_degenerate: bool,
    pub approximate_dual_brackets: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstantsReport {
    pub space: String,
    pub variant: String,
    pub dim: usize,
    pub phi: Vec<f64>,
    pub phi_star: Vec<f64>,
    pub phi_star_lower: Vec<f64>,
    pub democracy: f64,
    pub bidemocracy: f64,
    pub certificates: UnconditionalCertificates,
    pub greedy_lower: f64,
    pub greedy_upper: f64,
    pub sampled_greedy_ratio: f64,
    pub property_a: Option<PropertyASearch>,
    pub flags: ReportFlags,
    pub checks: Vec<Check>,
}

impl ConstantsReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

pub fn constants_report(
    space: &NormDescriptor,
    samples: usize,
    budget: &SearchBudget,
    caps: &Caps,
) -> Result<ConstantsReport> {
    let n = space.dim();
    let digest = SpaceSpec::from_descriptor(space).digest();
    let tol = caps.tolerance;
    let table = IndicatorNorms::compute(space, caps)?;
    let phi = table.phi();
    let democracy = table.democracy();
    let dual = dual_fundamental_function(space, caps)?;
    let bidemocracy = bidemocracy_constant(&phi, &dual.values);
    let certificates = unconditional_certificates(space, samples.min(200), budget.seed);
    let (ks, ku) = (certificates.k_s_bound, certificates.k_u_bound);
    let greedy_upper = ks + ku * ku * democracy;

    let mut checks = Vec::new();
    let (bound_check, sampled) = greedy_bound_check(space, &digest, greedy_upper, samples, budget.seed, caps)?;
    checks.push(bound_check);
    let property_a = if space.is_unconditional() {
        Some(property_A_constant_search(space, budget, caps)?)
    } else {
        None
    };
    let pa = property_a.as_ref().map_or(f64::NAN, |p| p.lower_bound);
    let greedy_lower = if pa.is_nan() { sampled } else { sampled.max(pa) };

    checks.push(Check::at_most(
        "suppression-le-greedy-upper",
        &digest,
        ks,
        greedy_upper,
        tol,
    ));
    checks.push(Check::at_most(
        "democracy-le-greedy-upper",
        &digest,
        democracy,
        greedy_upper,
        tol,
    ));
    checks.push(Check::at_most(
        "greedy-lower-le-upper",
        &digest,
        greedy_lower,
        greedy_upper,
        tol,
    ));
    checks.push(Check::at_most(
        "sampled-suppression-le-bound",
        &digest,
        certificates.k_s_sampled,
        ks,
        tol,
    ));
    checks.push(Check::at_most(
        "sampled-unconditional-le-bound",
        &digest,
        certificates.k_u_sampled,
        ku,
        tol,
    ));
    checks.push(Check::at_most(
        "suppression-le-unconditional",
        &digest,
        certificates.ks_minus_ku,
        0.0,
        tol,
    ));
    checks.push(Check::at_most(
        "unconditional-le-twice-suppression",
        &digest,
        certificates.ku_minus_2ks,
        0.0,
        tol,
    ));
    if let Some(p) = &property_a {
        // Sampled greedy ratios never exceed K^2 times the Property (A) constant;
        // the search value is a lower bound for that constant, so a failure
        // here points at an incomplete search or a norm bug.
        checks.push(
            Check::at_most(
                "greedy-ratio-le-property-a",
                &digest,
                sampled,
                ks * ks * p.lower_bound.max(1.0),
                1e-6,
            )
            .with_witness(serde_json::to_value(&p.witness).unwrap_or_default()),
        );
    }
    let mut min_product = f64::INFINITY;
    for k in 1..=n {
        min_product = min_product.min(phi[k - 1] * dual.lower[k - 1] / k as f64);
    }
    checks.push(Check::at_least("phi-times-dual-ge-n", &digest, min_product, 1.0, tol));
    let mut lambda_rise = f64::NEG_INFINITY;
    for k in 1..n {
        lambda_rise = lambda_rise.max(phi[k] / (k + 1) as f64 - phi[k - 1] / k as f64);
    }
    if n > 1 {
        checks.push(Check::at_most(
            "phi-over-n-nonincreasing",
            &digest,
            lambda_rise,
            0.0,
            tol,
        ));
    }

    let approximate = dual
        .values
        .iter()
        .zip(&dual.lower)
        .any(|(u, l)| u - l > 1e-9 * u.max(1.0));
    Ok(ConstantsReport {
        space: digest,
        variant: space.variant_name().to_string(),
        dim: n,
        phi,
        phi_star: dual.values,
        phi_star_lower: dual.lower,
        democracy,
        bidemocracy,
        flags: ReportFlags {
            suppression_one_verified: space.is_unconditional(),
            truncation_degenerate: false,
            approximate_dual_brackets: approximate,
        },
        certificates,
        greedy_lower,
        greedy_upper,
        sampled_greedy_ratio: sampled,
        property_a,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l2_report() {
        let caps = Caps::default();
        let budget = SearchBudget {
            refinements: 200,
            ..Default::default()
        };
        let r = constants_report(&NormDescriptor::lp(6, 2.0), 300, &budget, &caps).unwrap();
        assert!(r.all_pass(), "{:?}", r.checks);
        assert!((r.democracy - 1.0).abs() < 1e-12);
        assert!((r.greedy_lower - 1.0).abs() < 1e-9);
        assert!((r.greedy_upper - 2.0).abs() < 1e-12);
    }

    #[test]
    fn haar_uses_martingale_bound() {
        let caps = Caps::default();
        let s = NormDescriptor::HaarLp { p: 3.0, level: 2 };
        let c = unconditional_certificates(&s, 50, 0);
        assert_eq!(c.k_u_bound, 2.0);
        assert!(c.k_u_sampled <= 2.0 + 1e-9 && c.k_u_sampled >= 1.0);
        assert!(c.ks_minus_ku <= 1e-12 && c.ku_minus_2ks <= 1e-12);
        let r = constants_report(&s, 200, &SearchBudget::default(), &caps).unwrap();
        assert!(r.property_a.is_none());
        assert!(r.all_pass(), "{:?}", r.checks);
    }

    #[test]
    fn schreier_report() {
        let caps = Caps::default();
        let phi = crate::fundfn::FundamentalFunction::power(1.0, 8).unwrap();
        let s = crate::spaces::build_prescribed_space_partial(&phi, &crate::spaces::SetFamily::schreier(8)).unwrap();
        let budget = SearchBudget {
            refinements: 300,
            ..Default::default()
        };
        let r = constants_report(&s, 500, &budget, &caps).unwrap();
        assert!((r.democracy - 2.0).abs() < 1e-12);
        assert!((r.greedy_upper - 3.0).abs() < 1e-12);
        assert!(r.all_pass(), "{:?}", r.checks);
    }
}
