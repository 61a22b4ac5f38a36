//! Greedy approximants, best m-term error and the Property (A) search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Caps;
use crate::error::{Error, Result};
use crate::fundfn::IndicatorNorms;
use crate::par;
use crate::spaces::{CoefVector, IndexSet, NormDescriptor};

/// Coordinates sorted by decreasing modulus, smaller index first on ties.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GreedyOrdering(pub Vec<usize>);

impl GreedyOrdering {
    pub fn of(x: &[f64]) -> Self {
        let mut rho: Vec<usize> = (0..x.len()).collect();
        rho.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()).then(a.cmp(&b)));
        GreedyOrdering(rho)
    }

    /// The first `m` coordinates of the ordering.
    pub fn head(&self, m: usize) -> IndexSet {
        IndexSet::from_indices(self.0[..m].iter().copied())
    }
}

pub fn greedy_approximant(x: &CoefVector, m: usize) -> Result<CoefVector> {
    if m > x.len() {
        return Err(Error::OutOfRange(format!("m = {m} exceeds dimension {}", x.len())));
    }
    Ok(x.project(GreedyOrdering::of(x.as_slice()).head(m)))
}

/// `min_{|A| <= m} ||x - P_A x||`, by enumerating `m`-subsets of the support.
pub fn sigma_m(space: &NormDescriptor, x: &CoefVector, m: usize, caps: &Caps) -> Result<f64> {
    let n = x.len();
    x.check_dim(space.dim())?;
    if m > n {
        return Err(Error::OutOfRange(format!("m = {m} exceeds dimension {n}")));
    }
    if n > caps.enumeration {
        return Err(Error::CapExceeded {
            what: "enumeration",
            value: n,
            cap: caps.enumeration,
        });
    }
    let supp = x.support();
    let idx: Vec<usize> = supp.iter().collect();
    let k = m.min(idx.len());
    if k == idx.len() {
        return Ok(0.0);
    }
    let mut rest = x.as_slice().to_vec();
    let mut best = f64::INFINITY;
    for_each_combination(idx.len(), k, |pick| {
        for &j in pick {
            rest[idx[j]] = 0.0;
        }
        best = best.min(space.value(&rest));
        for &j in pick {
            rest[idx[j]] = x[idx[j]];
        }
    });
    Ok(best)
}

/// Calls `f` with every `k`-subset of `0..n` in lexicographic order.
pub(crate) fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        f(&c);
        let Some(i) = (0..k).rev().find(|&i| c[i] < n - k + i) else {
            return;
        };
        c[i] += 1;
        for j in i + 1..k {
            c[j] = c[j - 1] + 1;
        }
    }
}

/// `||x - G_m x|| / sigma_m(x)`; defined as 1 when both vanish.
pub fn greedy_error_ratio(space: &NormDescriptor, x: &CoefVector, m: usize, caps: &Caps) -> Result<f64> {
    let g = greedy_approximant(x, m)?;
    let num = space.norm(&x.sub(&g))?;
    let den = sigma_m(space, x, m, caps)?;
    if den <= 0.0 {
        if num <= caps.tolerance {
            return Ok(1.0);
        }
        return Err(Error::Invariant(format!(
            "best {m}-term error vanishes but the greedy error is {num}"
        )));
    }
    Ok(num / den)
}

/// `x = w + u` and `y = w + t`, where `t` moves the block `u` of maximal
/// moduli onto fresh coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyRearrangementCase {
    pub w: CoefVector,
    pub u: CoefVector,
    pub t: CoefVector,
}

impl GreedyRearrangementCase {
    /// `w` plus `s` on `b` and on `b_tilde`.
    pub fn from_sets(w: CoefVector, b: IndexSet, b_tilde: IndexSet, s: f64) -> Self {
        let n = w.len();
        Self {
            u: CoefVector::indicator(n, b).scale(s),
            t: CoefVector::indicator(n, b_tilde).scale(s),
            w,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.w.len();
        self.u.check_dim(n)?;
        self.t.check_dim(n)?;
        let (sw, su, st) = (self.w.support(), self.u.support(), self.t.support());
        if !(sw.is_disjoint(su) && sw.is_disjoint(st) && su.is_disjoint(st)) {
            return Err(Error::InvalidVector("w, u, t must have disjoint supports".into()));
        }
        if su.len() != st.len() {
            return Err(Error::InvalidVector("u and t must have supports of equal size".into()));
        }
        let moduli: Vec<f64> = su
            .iter()
            .map(|i| self.u[i].abs())
            .chain(st.iter().map(|j| self.t[j].abs()))
            .collect();
        if let Some(&s) = moduli.first() {
            if moduli.iter().any(|&v| v != s) {
                return Err(Error::InvalidVector("u and t must share one modulus".into()));
            }
            if self.w.sup_norm() > s {
                return Err(Error::InvalidVector("w exceeds the modulus of u".into()));
            }
        }
        Ok(())
    }
}

/// `||w + t|| / ||w + u||`.
#[allow(non_snake_case)]
pub fn property_A_ratio(space: &NormDescriptor, case: &GreedyRearrangementCase) -> Result<f64> {
    case.validate()?;
    let den = space.norm(&case.w.add(&case.u))?;
    let num = space.norm(&case.w.add(&case.t))?;
    if den <= 0.0 {
        return Err(Error::InvalidVector("w + u is zero".into()));
    }
    Ok(num / den)
}

/// Search effort for [`property_A_constant_search`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Random starts refined by coordinate ascent after the vertex sweep.
    pub refinements: usize,
    /// Passes of coordinate ascent per start.
    pub ascent_passes: usize,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            refinements: 1000,
            ascent_passes: 2,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyASearch {
    pub lower_bound: f64,
    pub witness: GreedyRearrangementCase,
    /// Best ratio over the vertex cases alone.
    pub vertex_bound: f64,
    pub vertex_cases: u64,
}

/// Largest `||w + 1_Bt|| / ||w + 1_B||` found, with `0 <= w <= 1` off `B`, `Bt`.
///
/// Every vertex case (`w` an indicator) is checked through the table of
/// indicator norms; random starts are then improved coordinate by coordinate.
#[allow(non_snake_case)]
pub fn property_A_constant_search(
    space: &NormDescriptor,
    budget: &SearchBudget,
    caps: &Caps,
) -> Result<PropertyASearch> {
    if !space.is_unconditional() {
        return Err(Error::Precondition(format!(
            "{} is not certified 1-unconditional",
            space.variant_name()
        )));
    }
    let n = space.dim();
    let table = IndicatorNorms::compute(space, caps)?;
    let (vertex_bound, vw, vb, vbt, vertex_cases) = vertex_sweep(&table, n);
    let mut best = PropertyASearch {
        lower_bound: vertex_bound,
        witness: GreedyRearrangementCase::from_sets(CoefVector::indicator(n, vw), vb, vbt, 1.0),
        vertex_bound,
        vertex_cases,
    };
    if n < 2 || budget.refinements == 0 {
        return Ok(best);
    }
    let results = par::map_range(budget.refinements, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed ^ (r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        refine(space, n, budget.ascent_passes, &mut rng)
    });
    for (ratio, case) in results {
        if ratio > best.lower_bound {
            best.lower_bound = ratio;
            best.witness = case;
        }
    }
    Ok(best)
}

/// Max of `N(W + Bt) / N(W + B)` over disjoint `W, B, Bt` with `|B| = |Bt| >= 1`.
fn vertex_sweep(table: &IndicatorNorms, n: usize) -> (f64, IndexSet, IndexSet, IndexSet, u64) {
    let full = (1u64 << n) - 1;
    let per_w = par::map_range(1usize << n, |wm| {
        let w = wm as u64;
        let free = full & !w;
        let mut best = (0.0f64, 0u64, 0u64);
        let mut count = 0u64;
        // B ranges over nonempty submasks of free, Bt over same-size submasks of free \ B.
        let mut b = free;
        while b != 0 {
            let rest = free & !b;
            let k = b.count_ones();
            let den = table.get(IndexSet(w | b));
            let mut bt = rest;
            loop {
                if bt.count_ones() == k {
                    count += 1;
                    let r = table.get(IndexSet(w | bt)) / den;
                    if r > best.0 {
                        best = (r, b, bt);
                    }
                }
                if bt == 0 {
                    break;
                }
                bt = (bt - 1) & rest;
            }
            b = (b - 1) & free;
        }
        (best, count)
    });
    let mut out = (0.0, IndexSet::EMPTY, IndexSet::EMPTY, IndexSet::EMPTY, 0u64);
    for (w, ((r, b, bt), c)) in per_w.into_iter().enumerate() {
        out.4 += c;
        if r > out.0 {
            out = (r, IndexSet(w as u64), IndexSet(b), IndexSet(bt), out.4);
        }
    }
    out
}

fn refine(space: &NormDescriptor, n: usize, passes: usize, rng: &mut ChaCha8Rng) -> (f64, GreedyRearrangementCase) {
    // Random partition into S, B, Bt with |B| = |Bt| = k.
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let k = rng.gen_range(1..=n / 2);
    let b = IndexSet::from_indices(perm[..k].iter().copied());
    let bt = IndexSet::from_indices(perm[k..2 * k].iter().copied());
    let s: Vec<usize> = perm[2 * k..].to_vec();
    let mut w = vec![0.0; n];
    for &i in &s {
        w[i] = rng.gen::<f64>();
    }
    let ratio = |w: &[f64]| {
        let mut x = w.to_vec();
        let mut y = w.to_vec();
        for i in b.iter() {
            x[i] = 1.0;
        }
        for j in bt.iter() {
            y[j] = 1.0;
        }
        space.value(&y) / space.value(&x)
    };
    let mut cur = ratio(&w);
    let mut step = 0.5;
    for _ in 0..passes {
        for &i in &s {
            let old = w[i];
            for cand in [0.0, 1.0, (old - step).max(0.0), (old + step).min(1.0)] {
                w[i] = cand;
                let r = ratio(&w);
                if r > cur {
                    cur = r;
                } else {
                    w[i] = old;
                }
                if w[i] != old {
                    break;
                }
            }
        }
        step *= 0.5;
    }
    let case = GreedyRearrangementCase::from_sets(CoefVector::from_raw(w), b, bt, 1.0);
    (cur, case)
}

/// Seeded test vectors: mixes of repeated levels (to exercise ties), zeros and
/// uniform entries, with random signs.
pub fn random_vector(rng: &mut impl Rng, n: usize) -> CoefVector {
    let levels = [1.0, 0.5, 0.25];
    let v = (0..n)
        .map(|_| {
            let mag = match rng.gen_range(0..4) {
                0 => 0.0,
                1 => levels[rng.gen_range(0..levels.len())],
                _ => rng.gen::<f64>(),
            };
            if rng.gen::<bool>() {
                -mag
            } else {
                mag
            }
        })
        .collect();
    CoefVector::from_raw(v)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreedyBounds {
    pub lower: f64,
    pub upper: f64,
    pub democracy: f64,
    pub property_a: f64,
    /// Largest sampled greedy error ratio.
    pub sampled_ratio: f64,
}

/// Lower bound from sampled ratios and the Property (A) search; upper bound
/// `1 + Delta` for 1-unconditional spaces and infinity otherwise.
pub fn greedy_constant_bounds(
    space: &NormDescriptor,
    samples: usize,
    budget: &SearchBudget,
    caps: &Caps,
) -> Result<GreedyBounds> {
    let n = space.dim();
    let table = IndicatorNorms::compute(space, caps)?;
    let democracy = table.democracy();
    let ratios = par::map_range(samples, |r| -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed.wrapping_add(r as u64));
        let x = random_vector(&mut rng, n);
        let m = rng.gen_range(0..=n);
        greedy_error_ratio(space, &x, m, caps)
    });
    let mut sampled = 1.0f64;
    for r in ratios {
        sampled = sampled.max(r?);
    }
    let (property_a, upper) = if space.is_unconditional() {
        let pa = property_A_constant_search(space, budget, caps)?.lower_bound;
        (pa, 1.0 + democracy)
    } else {
        (f64::NAN, f64::INFINITY)
    };
    Ok(GreedyBounds {
        lower: if property_a.is_nan() {
            sampled
        } else {
            sampled.max(property_a)
        },
        upper,
        democracy,
        property_a,
        sampled_ratio: sampled,
    })
}
