//! Fundamental functions of concrete spaces by subset enumeration.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::function::FundamentalFunction;
use crate::config::Caps;
use crate::error::{Error, Result};
use crate::par;
use crate::spaces::{dual_norm_exact, CoefVector, DualBracket, DualOracle, IndexSet, NormDescriptor};

/// `|1_A|` for every subset `A` of the coordinates, indexed by bitmask.
#[derive(Clone, Debug)]
pub struct IndicatorNorms {
    pub dim: usize,
    pub values: Vec<f64>,
}

impl IndicatorNorms {
    pub fn compute(space: &NormDescriptor, caps: &Caps) -> Result<Self> {
        let n = space.dim();
        check_enum_cap(n, caps)?;
        let values = par::map_range(1usize << n, |mask| {
            space.value(CoefVector::indicator(n, IndexSet(mask as u64)).as_slice())
        });
        Ok(Self { dim: n, values })
    }

    pub fn get(&self, set: IndexSet) -> f64 {
        self.values[set.0 as usize]
    }

    /// `(max, min)` of `|1_A|` over `|A| = k`, for `k = 1..=dim`.
    pub fn extremes_by_size(&self) -> Vec<(f64, f64)> {
        let mut out = vec![(0.0f64, f64::INFINITY); self.dim];
        for (mask, v) in self.values.iter().enumerate().skip(1) {
            let k = (mask as u64).count_ones() as usize;
            let e = &mut out[k - 1];
            e.0 = e.0.max(*v);
            e.1 = e.1.min(*v);
        }
        out
    }

    /// `phi(k) = max_{|A| <= k} |1_A|`.
    pub fn phi(&self) -> Vec<f64> {
        let mut run = 0.0f64;
        self.extremes_by_size()
            .iter()
            .map(|(mx, _)| {
                run = run.max(*mx);
                run
            })
            .collect()
    }

    /// `max_k max_{|A|=k} |1_A| / min_{|B|=k} |1_B|`. For increasing `phi` this
    /// equals the constant over all pairs with `|A| <= |B|`.
    pub fn democracy(&self) -> f64 {
        let phi = self.phi();
        self.extremes_by_size()
            .iter()
            .zip(&phi)
            .map(|((_, mn), p)| p / mn)
            .fold(1.0, f64::max)
    }
}

fn check_enum_cap(n: usize, caps: &Caps) -> Result<()> {
    if n > caps.enumeration {
        return Err(Error::CapExceeded {
            what: "enumeration",
            value: n,
            cap: caps.enumeration,
        });
    }
    Ok(())
}

pub fn fundamental_function(space: &NormDescriptor, caps: &Caps) -> Result<FundamentalFunction> {
    let t = IndicatorNorms::compute(space, caps)?;
    FundamentalFunction::grid(t.phi())
}

pub fn democracy_constant(space: &NormDescriptor, caps: &Caps) -> Result<f64> {
    Ok(IndicatorNorms::compute(space, caps)?.democracy())
}

/// Dual fundamental function together with how it was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualFundamental {
    /// `phi*(k)` for `k = 1..=dim`; for `k >= dim` the value saturates.
    pub values: Vec<f64>,
    /// Lower ends of the brackets, equal to `values` when every dual was exact.
    pub lower: Vec<f64>,
    pub exact: bool,
    /// Set attaining `phi*(k)` (1-based display in reports).
    pub argmax: Vec<IndexSet>,
}

impl DualFundamental {
    pub fn function(&self) -> Result<FundamentalFunction> {
        FundamentalFunction::grid(self.values.clone())
    }
}

pub fn dual_fundamental_function(space: &NormDescriptor, caps: &Caps) -> Result<DualFundamental> {
    let n = space.dim();
    check_enum_cap(n, caps)?;
    let oracle = DualOracle::new(space);
    let brackets: Vec<Result<DualBracket>> = par::map_range(1usize << n, |mask| {
        if mask == 0 {
            return Ok(DualBracket {
                lower: 0.0,
                upper: 0.0,
                exact: true,
            });
        }
        oracle.bracket(&CoefVector::indicator(n, IndexSet(mask as u64)))
    });
    let brackets: Vec<DualBracket> = brackets.into_iter().collect::<Result<_>>()?;
    let mut values = vec![0.0f64; n];
    let mut lower = vec![0.0f64; n];
    let mut argmax = vec![IndexSet::EMPTY; n];
    let mut exact = true;
    for (mask, b) in brackets.iter().enumerate().skip(1) {
        let k = (mask as u64).count_ones() as usize - 1;
        exact &= b.exact;
        if b.upper > values[k] {
            values[k] = b.upper;
            argmax[k] = IndexSet(mask as u64);
        }
        lower[k] = lower[k].max(b.lower);
    }
    // sup over |A| <= k.
    for k in 1..n {
        if values[k - 1] > values[k] {
            values[k] = values[k - 1];
            argmax[k] = argmax[k - 1];
        }
        lower[k] = lower[k].max(lower[k - 1]);
    }
    Ok(DualFundamental {
        values,
        lower,
        exact,
        argmax,
    })
}

/// Exact `phi*(k)` for a polyhedral space: float enumeration picks every set
/// within `1e-7` of the float maximum, and those are re-solved in exact
/// arithmetic.
pub fn dual_fundamental_exact(space: &NormDescriptor, caps: &Caps) -> Result<Vec<BigRational>> {
    use num_traits::Zero;
    let n = space.dim();
    check_enum_cap(n, caps)?;
    if space.flat_atoms().is_none() {
        return Err(Error::Precondition(format!(
            "exact dual fundamental function needs a polyhedral space, got {}",
            space.variant_name()
        )));
    }
    let oracle = DualOracle::new(space);
    let floats: Vec<Result<f64>> = par::map_range(1usize << n, |mask| {
        if mask == 0 {
            return Ok(0.0);
        }
        Ok(oracle.bracket(&CoefVector::indicator(n, IndexSet(mask as u64)))?.upper)
    });
    let floats: Vec<f64> = floats.into_iter().collect::<Result<_>>()?;
    let mut best = vec![0.0f64; n];
    for (mask, v) in floats.iter().enumerate().skip(1) {
        let k = (mask as u64).count_ones() as usize - 1;
        best[k] = best[k].max(*v);
    }
    let candidates: Vec<usize> = (1..floats.len())
        .filter(|&mask| {
            let k = (mask as u64).count_ones() as usize - 1;
            floats[mask] >= best[k] - 1e-7 * best[k].max(1.0)
        })
        .collect();
    let exact: Vec<Result<BigRational>> = par::map_slice(&candidates, |&mask| {
        let g: Vec<BigRational> = (0..n)
            .map(|i| {
                if (mask >> i) & 1 == 1 {
                    BigRational::from_integer(1.into())
                } else {
                    BigRational::zero()
                }
            })
            .collect();
        dual_norm_exact(space, &g)
    });
    let mut out = vec![BigRational::zero(); n];
    for (mask, v) in candidates.iter().zip(exact) {
        let v = v?;
        let k = (*mask as u64).count_ones() as usize - 1;
        if v > out[k] {
            out[k] = v;
        }
    }
    for k in 1..n {
        if out[k - 1] > out[k] {
            out[k] = out[k - 1].clone();
        }
    }
    Ok(out)
}

/// `max_k phi(k) phi*(k) / k`.
pub fn bidemocracy_constant(phi: &[f64], phi_star: &[f64]) -> f64 {
    phi.iter()
        .zip(phi_star)
        .enumerate()
        .map(|(k, (a, b))| a * b / (k + 1) as f64)
        .fold(1.0f64, f64::max)
}

pub fn rationals_to_f64(v: &[BigRational]) -> Vec<f64> {
    v.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect()
}
