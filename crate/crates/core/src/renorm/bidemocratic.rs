//! `|||x||| = max(||x||, max_k phi(k)/k * S_k(|x|))`, and the
//! `(1+eps)^2`-greedy bidemocratic variant built on top of it.

use super::{check_eps, require_normalized, RenormParams};
use crate::config::Caps;
use crate::error::{Error, Result};
use crate::fundfn::{bidemocracy_constant, dual_fundamental_function, IndicatorNorms};
use crate::spaces::NormDescriptor;

/// Adds the top-k part `max_k (phi(k)/k) S_k(|x|)`, which makes the basis
/// 1-bidemocratic without changing `phi`.
pub fn renorm_bidemocratic(space: &NormDescriptor, caps: &Caps) -> Result<NormDescriptor> {
    if !space.is_unconditional() {
        return Err(Error::Precondition(format!(
            "{} is not certified 1-unconditional",
            space.variant_name()
        )));
    }
    let phi = IndicatorNorms::compute(space, caps)?.phi();
    let weights = phi.iter().enumerate().map(|(k, v)| v / (k + 1) as f64).collect();
    let out = NormDescriptor::MaxOf {
        parts: vec![
            space.clone(),
            NormDescriptor::TopK {
                dim: space.dim(),
                weights,
            },
        ],
    };
    out.validate(caps)?;
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct BidemocraticGreedy {
    /// `eps ||x|| + max_k S_k(|x|) / phi*(k)`.
    pub intermediate: NormDescriptor,
    /// Intermediate norm divided by `1 + eps`, then made 1-bidemocratic.
    pub composed: NormDescriptor,
    pub params: RenormParams,
}

/// Requires a normalized, 1-unconditional, 1-bidemocratic basis.
pub fn renorm_bidemocratic_greedy(space: &NormDescriptor, eps: f64, caps: &Caps) -> Result<BidemocraticGreedy> {
    check_eps(eps)?;
    let table = IndicatorNorms::compute(space, caps)?;
    require_normalized(space, &table, caps)?;
    let phi = table.phi();
    let phi_star = dual_fundamental_function(space, caps)?.values;
    let bidem = bidemocracy_constant(&phi, &phi_star);
    if bidem > 1.0 + caps.tolerance {
        return Err(Error::Precondition(format!(
            "bidemocracy constant {bidem} exceeds 1; renorm to a 1-bidemocratic norm first"
        )));
    }
    let n = space.dim();
    let top = NormDescriptor::TopK {
        dim: n,
        weights: phi_star.iter().map(|v| 1.0 / v).collect(),
    };
    let intermediate = NormDescriptor::ScaledSum {
        parts: vec![(eps, space.clone()), (1.0, top.clone())],
    };
    intermediate.validate(caps)?;
    let scaled = NormDescriptor::ScaledSum {
        parts: vec![(eps / (1.0 + eps), space.clone()), (1.0 / (1.0 + eps), top)],
    };
    let composed = renorm_bidemocratic(&scaled, caps)?;
    let mut params = RenormParams::new(eps, table.democracy());
    params.unit_value = Some(intermediate.value(crate::spaces::CoefVector::unit(n, 0).as_slice()));
    Ok(BidemocraticGreedy {
        intermediate,
        composed,
        params,
    })
}
