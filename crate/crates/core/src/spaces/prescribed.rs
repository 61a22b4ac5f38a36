//! Space with a prescribed fundamental function:
//! `|x| = max(|x|_inf, sup_{A in F} (phi(|A|)/|A|) sum_{i in A} |x_i|)`.

use num_rational::BigRational;

use super::descriptor::{AtomSet, NormDescriptor};
use super::lp::rational_from_f64;
use super::setfamily::SetFamily;
use super::vector::IndexSet;
use crate::error::{Error, Result};
use crate::fundfn::FundamentalFunction;

/// Requires `phi(1) = 1` and a member of every size `1..=dim`, so that the
/// result has fundamental function `phi` on `1..=dim`.
pub fn build_prescribed_space(phi: &FundamentalFunction, family: &SetFamily) -> Result<NormDescriptor> {
    let missing = family.missing_sizes();
    if !missing.is_empty() {
        return Err(Error::Precondition(format!("family has no set of size {:?}", missing)));
    }
    build_prescribed_space_partial(phi, family)
}

/// Same norm without the richness requirement; sizes missing from the family
/// are then not attained.
pub fn build_prescribed_space_partial(phi: &FundamentalFunction, family: &SetFamily) -> Result<NormDescriptor> {
    phi.check()?;
    if (phi.eval(1.0) - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidFundamentalFunction(format!(
            "phi(1) = {} but must be 1; rescale first",
            phi.eval(1.0)
        )));
    }
    let n = family.dim;
    let mut exact: Vec<Vec<BigRational>> = Vec::new();
    for a in family.sets.iter().filter(|a| a.len() >= 2) {
        let k = a.len();
        let w = rational_from_f64(phi.eval(k as f64)) / BigRational::from_integer(k.into());
        let row = (0..n)
            .map(|i| {
                if a.contains(i) {
                    w.clone()
                } else {
                    BigRational::from_integer(0.into())
                }
            })
            .collect();
        exact.push(row);
    }
    // Singletons carry weight phi(1) = 1 and are already coordinate atoms.
    Ok(NormDescriptor::Polyhedral {
        dim: n,
        atoms: AtomSet::from_exact(exact),
    })
}

/// Exact `|1_B|` for a polyhedral space with stored rational atoms.
pub fn indicator_norm_exact(space: &NormDescriptor, set: IndexSet) -> Option<BigRational> {
    use num_traits::{One, Zero};
    let atoms = space.flat_atoms_exact()?;
    let mut best = if set.is_empty() {
        BigRational::zero()
    } else {
        BigRational::one()
    };
    for a in atoms {
        let s = set.iter().fold(BigRational::zero(), |acc, i| acc + &a[i]);
        if s > best {
            best = s;
        }
    }
    Some(best)
}
