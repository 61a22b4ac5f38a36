//! Dilation profiles, concave envelopes, the alternating generator and
//! regularity checks.

use serde::{Deserialize, Serialize};

use super::function::{Formula, FundamentalFunction};
use crate::error::{Error, Result};

/// Truncated estimates of `delta_phi(y) = liminf lambda(y n) / lambda(n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaProfile {
    /// `(y, estimate)` pairs in increasing `y`.
    pub values: Vec<(usize, f64)>,
    /// Estimate at the largest `y`.
    pub overall: f64,
    pub cap: usize,
    /// Window `[lo, hi]` of `n` used for each `y`.
    pub windows: Vec<(usize, usize)>,
}

/// `min lambda(m n)/lambda(n)` over `n` in `[ceil(cap/(2m)), floor(cap/m)]`,
/// so every `m n` lands in the upper half of `[1, cap]`.
pub fn delta_at(phi: &FundamentalFunction, m: usize, cap: usize) -> Result<(f64, (usize, usize))> {
    if m == 0 {
        return Err(Error::OutOfRange("dilation must be at least 1".into()));
    }
    if cap < 4 * m {
        return Err(Error::OutOfRange(format!(
            "cap {cap} too small for dilation {m} (need at least {})",
            4 * m
        )));
    }
    let lo = cap.div_ceil(2 * m);
    let hi = cap / m;
    let mut best = f64::INFINITY;
    for n in lo..=hi {
        let n = n as f64;
        best = best.min(phi.lambda(m as f64 * n) / phi.lambda(n));
    }
    Ok((best, (lo, hi)))
}

pub fn delta_profile(phi: &FundamentalFunction, m_grid: &[usize], cap: usize) -> Result<DeltaProfile> {
    if cap > phi.cap() {
        return Err(Error::OutOfRange(format!(
            "profile cap {cap} exceeds the domain cap {}",
            phi.cap()
        )));
    }
    let mut grid = m_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let mut values = Vec::new();
    let mut windows = Vec::new();
    for &m in &grid {
        let (v, w) = delta_at(phi, m, cap)?;
        values.push((m, v));
        windows.push(w);
    }
    let overall = values.last().map_or(1.0, |v| v.1);
    Ok(DeltaProfile {
        values,
        overall,
        cap,
        windows,
    })
}

pub fn make_alternating_fundfn(breakpoints: &[f64], cap: usize) -> Result<FundamentalFunction> {
    FundamentalFunction::closed(
        Formula::Alternating {
            breakpoints: breakpoints.to_vec(),
        },
        cap,
    )
}

/// Smallest concave majorant of the samples on `1..=N`, continued as
/// `lambda(N) x`.
pub fn concave_envelope(phi: &FundamentalFunction) -> Result<FundamentalFunction> {
    let samples = phi.table(phi.cap());
    let hull = upper_hull(&samples);
    let n = samples.len();
    let mut out = vec![0.0; n];
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ya, yb) = (samples[a], samples[b]);
        for (k, o) in out.iter_mut().enumerate().take(b + 1).skip(a) {
            let t = (k - a) as f64 / (b - a) as f64;
            *o = ya + (yb - ya) * t;
        }
    }
    if hull.len() == 1 {
        out[0] = samples[0];
    }
    for (k, (&p, &s)) in out.iter().zip(&samples).enumerate() {
        if p < s - 1e-12 * s || p > 2.0 * s + 1e-12 * s {
            return Err(Error::Invariant(format!(
                "envelope at {} is {p}, outside [phi, 2 phi] = [{s}, {}]",
                k + 1,
                2.0 * s
            )));
        }
    }
    FundamentalFunction::grid(out)
}

/// Indices of the upper hull vertices of `(k + 1, y_k)`.
fn upper_hull(y: &[f64]) -> Vec<usize> {
    let mut h: Vec<usize> = Vec::new();
    for i in 0..y.len() {
        while h.len() >= 2 {
            let (a, b) = (h[h.len() - 2], h[h.len() - 1]);
            // Drop b when it lies on or below the chord from a to i.
            let cross = (b - a) as f64 * (y[i] - y[a]) - (i - a) as f64 * (y[b] - y[a]);
            if cross >= 0.0 {
                h.pop();
            } else {
                break;
            }
        }
        h.push(i);
    }
    h
}

/// True when slopes between consecutive samples on `1..=n` are nonincreasing.
pub fn is_concave_on_grid(phi: &FundamentalFunction, n: usize, tol: f64) -> bool {
    let t = phi.table(n);
    t.windows(3).all(|w| w[2] - w[1] <= w[1] - w[0] + tol)
}

/// Smallest integer `r > 2` with `phi(r n) <= r phi(n) / 2` for every grid `n`
/// with `r n <= cap`.
pub fn urp_check(phi: &FundamentalFunction) -> Option<usize> {
    let cap = phi.cap();
    (3..=cap).find(|&r| {
        (1..=cap / r).all(|n| {
            let lhs = phi.eval((r * n) as f64);
            let rhs = 0.5 * r as f64 * phi.eval(n as f64);
            lhs <= rhs * (1.0 + 1e-12)
        })
    })
}

/// `max_n (1/n) sum_{k <= n} phi(n)/phi(k)` on the grid.
pub fn weak_urp_constant(phi: &FundamentalFunction) -> f64 {
    let t = phi.table(phi.cap());
    let mut inv_sum = 0.0;
    let mut best = 0.0f64;
    for (i, v) in t.iter().enumerate() {
        inv_sum += 1.0 / v;
        best = best.max(v * inv_sum / (i + 1) as f64);
    }
    best
}

/// Best constants `a <= psi/phi <= b` on `1..=n`.
pub fn equivalence(phi: &FundamentalFunction, psi: &FundamentalFunction, n: usize) -> (f64, f64) {
    let mut a = f64::INFINITY;
    let mut b = 0.0f64;
    for k in 1..=n {
        let r = psi.eval(k as f64) / phi.eval(k as f64);
        a = a.min(r);
        b = b.max(r);
    }
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_profile_is_half_at_four() {
        let phi = FundamentalFunction::power(0.5, 100_000).unwrap();
        let p = delta_profile(&phi, &[4], 100_000).unwrap();
        assert!((p.overall - 0.5).abs() < 1e-12);
    }

    #[test]
    fn linear_profile_is_one() {
        let phi = FundamentalFunction::power(1.0, 1000).unwrap();
        let p = delta_profile(&phi, &[2, 3, 5, 10], 1000).unwrap();
        assert!(p.values.iter().all(|(_, v)| (*v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn small_cap_rejected() {
        let phi = FundamentalFunction::power(1.0, 100).unwrap();
        assert!(delta_profile(&phi, &[8], 31).is_err());
    }

    #[test]
    fn three_point_envelope() {
        let phi = FundamentalFunction::grid(vec![1.0, 1.2, 1.8]).unwrap();
        let psi = concave_envelope(&phi).unwrap();
        assert_eq!(psi.eval(2.0), 1.4);
        assert!(is_concave_on_grid(&psi, 3, 1e-12));
    }

    #[test]
    fn envelope_of_concave_is_identity() {
        let phi = FundamentalFunction::power(0.5, 50).unwrap();
        let psi = concave_envelope(&phi).unwrap();
        for k in 1..=50 {
            assert!((psi.eval(k as f64) - phi.eval(k as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn urp_examples() {
        assert_eq!(urp_check(&FundamentalFunction::power(0.5, 1000).unwrap()), Some(4));
        assert_eq!(urp_check(&FundamentalFunction::power(1.0, 1000).unwrap()), None);
        assert!(weak_urp_constant(&FundamentalFunction::power(0.5, 5000).unwrap()) <= 2.0);
    }
}
