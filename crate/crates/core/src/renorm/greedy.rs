//! `|||x||| = s||x|| + best_m(|x|) + L S_{n0}(|x|)`, rescaled so that
//! `|||e_i||| = 1`. Here `best_m` is the largest
//! `sum_i psi(|A_i|)/|A_i| <|x|, 1_{A_i}>` over at most `m` pairwise disjoint
//! members of the flat family.

use super::flat::{AdmissibleFamily, FlatContext};
use super::{check_eps, require_normalized, RenormParams};
use crate::config::Caps;
use crate::error::{Error, Result};
use crate::fundfn::{
    concave_envelope, delta_at, equivalence, regularize_dilation, FundamentalFunction, IndicatorNorms,
};
use crate::spaces::{CoefVector, DisjointFamily, NormDescriptor};

/// Domain on which the regularized fundamental function is built and checked.
const EXTENSION_CAP: usize = 1 << 14;

#[derive(Clone, Debug)]
pub struct GreedyRenorm {
    /// The renormed space, with `|||e_i||| = 1`.
    pub space: NormDescriptor,
    /// Same norm before dividing by `s + psi(1) + L`.
    pub unscaled: NormDescriptor,
    pub params: RenormParams,
    pub family: AdmissibleFamily,
}

/// Smallest `m >= 2` with `m/(m-1) <= 1 + eps`.
pub fn choose_m(eps: f64) -> usize {
    let mut m = 2usize;
    while m as f64 / (m - 1) as f64 > 1.0 + eps {
        m += 1;
    }
    m
}

/// `phi` on `1..=n`, continued linearly as `phi(n)/n * x`.
fn extend(phi: &[f64], cap: usize) -> Result<FundamentalFunction> {
    let n = phi.len();
    let slope = phi[n - 1] / n as f64;
    let samples = (1..=cap.max(n))
        .map(|k| if k <= n { phi[k - 1] } else { slope * k as f64 })
        .collect();
    FundamentalFunction::grid(samples)
}

pub fn renorm_greedy(space: &NormDescriptor, eps: f64, caps: &Caps) -> Result<GreedyRenorm> {
    check_eps(eps)?;
    let n = space.dim();
    let table = IndicatorNorms::compute(space, caps)?;
    require_normalized(space, &table, caps)?;
    let democracy = table.democracy();
    let q = 1.0 / (1.0 + eps);
    let c = 1.01 * democracy / (q * (1.0 - q));
    let ctx = FlatContext::new(space, q, c, caps)?;
    let family = ctx.family(caps)?;
    let mut params = RenormParams::new(eps, democracy);
    params.q = Some(q);
    params.c = Some(c);
    params.delta = Some(ctx.delta);

    let m = choose_m(eps);
    if (1.0 / eps).floor() as usize + 1 > n {
        return Err(Error::Infeasible(format!(
            "n0 exceeds dimension: n0 > 1/eps = {} but the dimension is {n}",
            1.0 / eps
        )));
    }
    let phi = extend(&ctx.phi, EXTENSION_CAP)?;
    let reg = regularize_dilation(&phi, m, eps)?;
    if !reg.all_checks_pass() {
        params.flags.push("regularization grid checks failed".into());
    }
    let psi = concave_envelope(&reg.psi)?;
    let cap = psi.cap();
    let (delta_psi, _) = delta_at(&psi, m, cap)?;
    if delta_psi <= q {
        return Err(Error::Infeasible(format!(
            "delta_psi({m}) = {delta_psi} does not exceed q = {q}"
        )));
    }
    let (a, b) = equivalence(&phi, &psi, cap);

    // n0: smallest integer > 1/eps with psi(x) > q m psi(x/m) for every
    // integer x in [n0, n]; beyond n the extension of phi is an artifact.
    let mut n0 = (1.0 / eps).floor() as usize + 1;
    for x in (n0..=n).rev() {
        let xf = x as f64;
        if psi.eval(xf) <= q * m as f64 * psi.eval(xf / m as f64) {
            n0 = x + 1;
            break;
        }
    }
    if n0 >= n {
        params.flags.push("truncation-degenerate".into());
    }
    if (n0 as f64) < m as f64 {
        params.flags.push("psi evaluated below 1 in the n0 test".into());
    }
    let s = eps * a / (1.0 + eps);
    let l = m as f64 * psi.eval(1.0) / eps;

    let weights: Vec<f64> = (1..=n).map(|k| psi.eval(k as f64) / k as f64).collect();
    let full = family.sets.len() == (1usize << n) - 1;
    let best = NormDescriptor::DisjointFamily(DisjointFamily {
        dim: n,
        sets: family.sets.sets.clone(),
        weights_by_size: weights,
        m,
        full,
    });
    let top = NormDescriptor::TopK {
        dim: n,
        weights: (1..=n).map(|k| if k <= n0 { 1.0 } else { 0.0 }).collect(),
    };
    let unscaled = NormDescriptor::ScaledSum {
        parts: vec![(s, space.clone()), (1.0, best.clone()), (l, top.clone())],
    };
    unscaled.validate(caps)?;
    let unit = s + psi.eval(1.0) + l;
    for i in 0..n {
        let v = unscaled.value(CoefVector::unit(n, i).as_slice());
        if (v - unit).abs() > 1e-9 * unit {
            return Err(Error::Invariant(format!(
                "|||e_{}||| = {v}, expected s + psi(1) + L = {unit}",
                i + 1
            )));
        }
    }
    let scaled = NormDescriptor::ScaledSum {
        parts: vec![(s / unit, space.clone()), (1.0 / unit, best), (l / unit, top)],
    };
    scaled.validate(caps)?;

    params.m = Some(m);
    params.psi = Some(psi);
    params.a = Some(a);
    params.b = Some(b);
    params.n0 = Some(n0);
    params.s = Some(s);
    params.l = Some(l);
    params.unit_value = Some(unit);
    params.check()?;
    Ok(GreedyRenorm {
        space: scaled,
        unscaled,
        params,
        family,
    })
}
