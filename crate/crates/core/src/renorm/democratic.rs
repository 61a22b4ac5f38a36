//! `|||x||| = max(||x||, sup_{A in family} (phi(|A|)/|A|) <|x|, 1_A>)`.

use super::flat::{AdmissibleFamily, FlatContext};
use super::{check_eps, RenormParams};
use crate::config::Caps;
use crate::error::Result;
use crate::spaces::lp::rational_from_f64;
use crate::spaces::{AtomSet, NormDescriptor};

/// `(1 + eps)`-democratic renorming; `q = 1/(1+eps)` and
/// `C = 1.01 Delta / (q (1 - q))`.
pub fn renorm_democratic(
    space: &NormDescriptor,
    eps: f64,
    caps: &Caps,
) -> Result<(NormDescriptor, RenormParams, AdmissibleFamily)> {
    check_eps(eps)?;
    let q = 1.0 / (1.0 + eps);
    let table = crate::fundfn::IndicatorNorms::compute(space, caps)?;
    super::require_normalized(space, &table, caps)?;
    let democracy = table.democracy();
    let c = 1.01 * democracy / (q * (1.0 - q));
    let ctx = FlatContext::new(space, q, c, caps)?;
    let family = ctx.family(caps)?;
    let n = space.dim();
    let exact = family
        .sets
        .sets
        .iter()
        .map(|a| {
            let w = rational_from_f64(ctx.phi[a.len() - 1] / a.len() as f64);
            (0..n)
                .map(|i| if a.contains(i) { w.clone() } else { Default::default() })
                .collect()
        })
        .collect();
    let out = NormDescriptor::AugmentedPolyhedral {
        base: Box::new(space.clone()),
        atoms: AtomSet::from_exact(exact),
    };
    out.validate(caps)?;
    let mut params = RenormParams::new(eps, democracy);
    params.q = Some(q);
    params.c = Some(c);
    params.delta = Some(ctx.delta);
    params.check()?;
    Ok((out, params, family))
}
