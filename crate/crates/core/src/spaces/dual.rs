//! Dual norms `|g|* = sup { <x, g> : N(x) <= 1 }`.
//!
//! Closed forms for `l_p` and the Haar system, a covering LP for anything that
//! flattens to a finite atom list, and a certified bracket otherwise.

use num_rational::BigRational;

use super::descriptor::{lp_norm, NormDescriptor};
use super::haar;
use super::lp::{solve_cover, solve_cover_f64};
use super::vector::{dot, CoefVector};
use crate::error::{Error, Result};

/// `lower <= |g|* <= upper`; `exact` when the two agree to working precision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualBracket {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
}

impl DualBracket {
    fn closed(v: f64) -> Self {
        Self {
            lower: v,
            upper: v,
            exact: true,
        }
    }

    /// Conservative point value: the upper end.
    pub fn value(&self) -> f64 {
        self.upper
    }

    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

const EXACT_GAP: f64 = 1e-9;

/// Dual-norm evaluator that flattens the space once and reuses the atom list.
pub struct DualOracle<'a> {
    space: &'a NormDescriptor,
    atoms: Option<Vec<Vec<f64>>>,
}

impl<'a> DualOracle<'a> {
    pub fn new(space: &'a NormDescriptor) -> Self {
        let atoms = match space {
            NormDescriptor::Lp { .. } | NormDescriptor::HaarLp { .. } => None,
            _ => space.flat_atoms(),
        };
        Self { space, atoms }
    }

    pub fn is_polyhedral(&self) -> bool {
        self.atoms.is_some()
    }

    pub fn bracket(&self, g: &CoefVector) -> Result<DualBracket> {
        g.check_dim(self.space.dim())?;
        let g = g.as_slice();
        if let Some(atoms) = &self.atoms {
            let absg: Vec<f64> = g.iter().map(|v| v.abs()).collect();
            return lp_bracket(atoms, &absg);
        }
        bracket_of(self.space, g)
    }

    /// Maximizer `x >= 0` of `<|g|, x>` over the unit ball, when the space is
    /// polyhedral.
    pub fn lp_point(&self, g: &CoefVector) -> Result<Option<Vec<f64>>> {
        let Some(atoms) = &self.atoms else {
            return Ok(None);
        };
        let absg: Vec<f64> = g.as_slice().iter().map(|v| v.abs()).collect();
        if absg.iter().all(|v| *v == 0.0) {
            return Ok(Some(vec![0.0; absg.len()]));
        }
        let (sol, _, _) = solve_cover_f64(atoms, &absg)?;
        Ok(Some(sol.point.iter().map(|v| v.max(0.0)).collect()))
    }
}

pub fn dual_norm_bracket(space: &NormDescriptor, g: &CoefVector) -> Result<DualBracket> {
    DualOracle::new(space).bracket(g)
}

/// `|g|*`, or the upper end of the bracket when no exact method applies.
pub fn dual_norm_eval(space: &NormDescriptor, g: &CoefVector) -> Result<f64> {
    Ok(dual_norm_bracket(space, g)?.value())
}

/// Exact dual norm of a rational functional on a polyhedral space.
pub fn dual_norm_exact(space: &NormDescriptor, g: &[BigRational]) -> Result<BigRational> {
    use num_traits::{Signed, Zero};
    if g.len() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            got: g.len(),
        });
    }
    let atoms = space.flat_atoms_exact().ok_or_else(|| {
        Error::Precondition(format!(
            "exact dual norm needs a polyhedral space, got {}",
            space.variant_name()
        ))
    })?;
    let absg: Vec<BigRational> = g.iter().map(|v| v.abs()).collect();
    if absg.iter().all(|v| v.is_zero()) {
        return Ok(BigRational::zero());
    }
    Ok(solve_cover(&atoms, &absg)?.value)
}

fn lp_bracket(atoms: &[Vec<f64>], absg: &[f64]) -> Result<DualBracket> {
    if absg.iter().all(|v| *v == 0.0) {
        return Ok(DualBracket::closed(0.0));
    }
    let (sol, lower, upper) = solve_cover_f64(atoms, absg)?;
    let exact = upper - lower <= EXACT_GAP * upper.max(1.0);
    Ok(if exact {
        DualBracket {
            lower: sol.value.min(upper).max(lower),
            upper: sol.value.min(upper).max(lower),
            exact,
        }
    } else {
        DualBracket { lower, upper, exact }
    })
}

fn bracket_of(space: &NormDescriptor, g: &[f64]) -> Result<DualBracket> {
    match space {
        NormDescriptor::Lp { p, .. } => Ok(DualBracket::closed(lp_norm(g, haar::conjugate(*p)))),
        NormDescriptor::HaarLp { p, level } => {
            let q = haar::conjugate(*p);
            Ok(DualBracket::closed(haar::step_norm(&haar::synthesize(*level, g, q), q)))
        }
        _ => {
            let absg: Vec<f64> = g.iter().map(|v| v.abs()).collect();
            if absg.iter().all(|v| *v == 0.0) {
                return Ok(DualBracket::closed(0.0));
            }
            let upper = upper_bound(space, &absg)?;
            let mut lower = 0.0f64;
            for x in candidate_points(space, &absg)? {
                let nx = space.value(&x);
                if nx > 0.0 {
                    lower = lower.max(dot(&x, &absg) / nx);
                }
            }
            let upper = upper.max(lower);
            let exact = upper - lower <= EXACT_GAP * upper.max(1.0);
            Ok(DualBracket {
                lower,
                upper: if exact { lower } else { upper },
                exact,
            })
        }
    }
}

/// Weak-duality upper bound for a nonnegative `g`; may be infinite for
/// seminorm parts.
fn upper_bound(space: &NormDescriptor, absg: &[f64]) -> Result<f64> {
    if let Some(atoms) = space.flat_atoms() {
        return Ok(lp_bracket(&atoms, absg)?.upper);
    }
    Ok(match space {
        NormDescriptor::Lp { .. } | NormDescriptor::HaarLp { .. } => bracket_of(space, absg)?.upper,
        // hull >= base, so its ball is smaller.
        NormDescriptor::UnconditionalHull { base } => upper_bound(base, absg)?,
        NormDescriptor::MaxOf { parts } => {
            let mut best = f64::INFINITY;
            for p in parts {
                best = best.min(upper_bound(p, absg)?);
            }
            best
        }
        NormDescriptor::ScaledSum { parts } => {
            let mut s = 0.0;
            for (w, p) in parts.iter().filter(|(w, _)| *w > 0.0) {
                let u = upper_bound(p, absg)?;
                if u.is_finite() && u > 0.0 {
                    s += w / u;
                }
            }
            if s > 0.0 {
                1.0 / s
            } else {
                f64::INFINITY
            }
        }
        NormDescriptor::AugmentedPolyhedral { base, atoms } => {
            let b = upper_bound(base, absg)?;
            let a = covering_upper(&atoms.rows, absg);
            b.min(a)
        }
        NormDescriptor::TopK { weights, .. } => {
            let l1: f64 = absg.iter().sum();
            let linf = absg.iter().fold(0.0f64, |m, v| m.max(*v));
            weights
                .iter()
                .enumerate()
                .filter(|(_, w)| **w > 0.0)
                .map(|(k, w)| linf.max(l1 / (k + 1) as f64) / w)
                .fold(f64::INFINITY, f64::min)
        }
        NormDescriptor::DisjointFamily(f) => {
            let rows: Vec<Vec<f64>> = f
                .sets
                .iter()
                .map(|a| CoefVector::indicator(f.dim, *a).scale(f.weight(a.len())).into_inner())
                .collect();
            covering_upper(&rows, absg)
        }
        NormDescriptor::Polyhedral { .. } | NormDescriptor::Tsirelson { .. } => unreachable!(),
    })
}

fn covering_upper(rows: &[Vec<f64>], absg: &[f64]) -> f64 {
    match solve_cover_f64(rows, absg) {
        Ok((_, _, u)) => u,
        Err(_) => f64::INFINITY,
    }
}

/// Points `x >= 0` whose ratios `<|g|, x> / N(x)` bound the dual norm below.
fn candidate_points(space: &NormDescriptor, absg: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = absg.len();
    let mut out = vec![absg.to_vec()];
    out.push(absg.iter().map(|v| if *v > 0.0 { 1.0 } else { 0.0 }).collect());
    for (i, v) in absg.iter().enumerate() {
        if *v > 0.0 {
            out.push(CoefVector::unit(n, i).into_inner());
        }
    }
    // Top-k indicators of g.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| absg[b].total_cmp(&absg[a]).then(a.cmp(&b)));
    let mut ind = vec![0.0; n];
    for &i in &order {
        ind[i] = 1.0;
        out.push(ind.clone());
    }
    collect_part_points(space, absg, &mut out)?;
    Ok(out)
}

fn collect_part_points(space: &NormDescriptor, absg: &[f64], out: &mut Vec<Vec<f64>>) -> Result<()> {
    if let Some(atoms) = space.flat_atoms() {
        if let Ok((sol, _, _)) = solve_cover_f64(&atoms, absg) {
            out.push(sol.point.iter().map(|v| v.max(0.0)).collect());
        }
        return Ok(());
    }
    match space {
        NormDescriptor::Lp { p, .. } => {
            let q = haar::conjugate(*p);
            if q.is_finite() {
                out.push(absg.iter().map(|v| v.powf(q - 1.0)).collect());
            }
        }
        NormDescriptor::HaarLp { p, level } => {
            let q = haar::conjugate(*p);
            let cells = haar::synthesize(*level, absg, q);
            out.push(
                haar::holder_functional(*level, &cells, q)
                    .iter()
                    .map(|v| v.abs())
                    .collect(),
            );
        }
        NormDescriptor::UnconditionalHull { base } => collect_part_points(base, absg, out)?,
        NormDescriptor::MaxOf { parts } => {
            for p in parts {
                collect_part_points(p, absg, out)?;
            }
        }
        NormDescriptor::ScaledSum { parts } => {
            for (_, p) in parts {
                collect_part_points(p, absg, out)?;
            }
        }
        NormDescriptor::AugmentedPolyhedral { base, .. } => collect_part_points(base, absg, out)?,
        _ => {}
    }
    Ok(())
}
