//! Equivalent fundamental function with `delta_psi(m) > 1/(1+eps)`.
//!
//! Each step takes `phi_j` with `lambda_j(R x) > d lambda_j(x)` for
//! `x >= n0` and replaces `lambda_j` on `[n0, inf)` by its geometric
//! interpolation between the nodes `n0 R^i`, which lifts the dilation
//! constant at `sqrt(R)` to `sqrt(d)`. Starting from `delta_phi(m^(2^k)) > d`
//! and halving `k` times gives `delta_psi(m) > d^(1/2^k)`.

use serde::{Deserialize, Serialize};

use super::calculus::{delta_at, equivalence};
use super::function::{Formula, FundamentalFunction};
use crate::error::{Error, Result};

const REL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolationStep {
    /// Node ratio `R = M^2`.
    pub ratio: f64,
    pub delta: f64,
    pub n0: usize,
    /// `mu` decreasing and `x mu` increasing on the grid.
    pub monotone: bool,
    /// `delta lambda <= mu <= R lambda`.
    pub sandwich: bool,
    /// `mu(M x) >= sqrt(delta) mu(x)` for `x >= n0`.
    pub dilation: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regularized {
    pub psi: FundamentalFunction,
    /// Number of halving steps.
    pub k: usize,
    /// `0.99 * delta_phi(m^(2^k))`.
    pub delta: f64,
    pub steps: Vec<InterpolationStep>,
    /// `a phi <= psi <= b phi` on the grid.
    pub a: f64,
    pub b: f64,
    /// Product of the per-step sandwich ratios; `b / a` may not exceed it.
    pub ratio_bound: f64,
    /// Truncated `delta_psi(m)`.
    pub delta_psi_m: f64,
}

impl Regularized {
    pub fn all_checks_pass(&self) -> bool {
        self.steps.iter().all(|s| s.monotone && s.sandwich && s.dilation)
            && self.b / self.a <= self.ratio_bound * (1.0 + 1e-9)
    }
}

pub fn regularize_dilation(phi: &FundamentalFunction, m: usize, eps: f64) -> Result<Regularized> {
    if m < 2 {
        return Err(Error::OutOfRange(format!("m must be at least 2, got {m}")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::OutOfRange(format!("eps must be positive, got {eps}")));
    }
    let cap = phi.cap();
    let target = 1.0 / (1.0 + eps);
    let mut k = 0;
    let delta = loop {
        k += 1;
        let y = 2u32
            .checked_pow(k as u32)
            .and_then(|e| (m as u64).checked_pow(e))
            .filter(|y| (*y as u128) * 4 <= cap as u128)
            .ok_or_else(|| {
                Error::Infeasible(format!(
                    "domain cap {cap} too small to certify delta_phi(m^(2^{k})) with m = {m}"
                ))
            })? as usize;
        let (d, _) = delta_at(phi, y, cap)?;
        let d = 0.99 * d;
        if d <= 0.0 {
            return Err(Error::Infeasible("measured delta is zero".into()));
        }
        if d.powf(1.0 / (1u64 << k) as f64) > target {
            break d;
        }
    };
    let mut cur = phi.clone();
    let mut steps = Vec::new();
    let mut ratio_bound = 1.0;
    for j in 0..k {
        let big_m = (m as f64).powi(1 << (k - j - 1));
        let ratio = big_m * big_m;
        let d = delta.powf(1.0 / (1u64 << j) as f64);
        let n0 = choose_n0(&cur, ratio, d)?;
        let next = FundamentalFunction::closed(
            Formula::Interpolated {
                base: Box::new(cur.clone()),
                n0: n0 as f64,
                ratio,
            },
            cap,
        )?;
        steps.push(check_step(&cur, &next, big_m, d, n0));
        ratio_bound *= ratio / d;
        cur = next;
    }
    let (a, b) = equivalence(phi, &cur, cap);
    let (delta_psi_m, _) = delta_at(&cur, m, cap)?;
    Ok(Regularized {
        psi: cur,
        k,
        delta,
        steps,
        a,
        b,
        ratio_bound,
        delta_psi_m,
    })
}

/// Smallest grid point `n0` with `lambda(R x) > d lambda(x)` (margin `1e-12`)
/// for every grid `x` in `[n0, cap / R]`.
fn choose_n0(phi: &FundamentalFunction, ratio: f64, d: f64) -> Result<usize> {
    let top = (phi.cap() as f64 / ratio).floor() as usize;
    if top == 0 {
        return Err(Error::Infeasible(format!(
            "no valid n0 within domain cap {} for node ratio {ratio}",
            phi.cap()
        )));
    }
    let mut n0 = 1;
    for x in (1..=top).rev() {
        let x = x as f64;
        let l = phi.lambda(x);
        if phi.lambda(ratio * x) <= d * l + 1e-12 * l {
            n0 = x as usize + 1;
            break;
        }
    }
    if n0 > top {
        return Err(Error::Infeasible(format!(
            "no valid n0 within domain cap {}",
            phi.cap()
        )));
    }
    Ok(n0)
}

fn check_step(
    base: &FundamentalFunction,
    next: &FundamentalFunction,
    big_m: f64,
    d: f64,
    n0: usize,
) -> InterpolationStep {
    let cap = next.cap();
    let mu = |x: f64| next.lambda(x);
    let mut monotone = true;
    for x in 1..cap {
        let (x0, x1) = (x as f64, (x + 1) as f64);
        monotone &= mu(x1) <= mu(x0) * (1.0 + REL);
        monotone &= x1 * mu(x1) >= x0 * mu(x0) * (1.0 - REL);
    }
    let mut sandwich = true;
    for x in n0..=cap {
        let l = base.lambda(x as f64);
        let v = mu(x as f64);
        sandwich &= d * l <= v * (1.0 + REL) && v <= big_m * big_m * l * (1.0 + REL);
    }
    let mut dilation = true;
    let s = d.sqrt();
    for x in n0..=(cap as f64 / big_m).floor() as usize {
        let x = x as f64;
        dilation &= mu(big_m * x) >= s * mu(x) * (1.0 - REL);
    }
    InterpolationStep {
        ratio: big_m * big_m,
        delta: d,
        n0,
        monotone,
        sandwich,
        dilation,
    }
}
