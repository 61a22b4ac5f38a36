//! Truncated Tsirelson norm as a finite polyhedral norm.
//!
//! The norming set is the closure of `{e_i*}` under
//! `f = (f_1 + .. + f_k) / 2` with successive supports and
//! `k <= min supp f_1` (1-based). Only atoms not coordinatewise dominated by
//! another atom are kept.

use std::collections::{HashMap, HashSet};

use super::descriptor::{AtomSet, NormDescriptor};
use super::lp::rational_from_f64;
use crate::config::Caps;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
struct Atom {
    coords: Vec<f64>,
    lo: usize,
    hi: usize,
}

impl Atom {
    fn new(coords: Vec<f64>) -> Self {
        let lo = coords.iter().position(|v| *v > 0.0).unwrap_or(0);
        let hi = coords.iter().rposition(|v| *v > 0.0).unwrap_or(0);
        Self { coords, lo, hi }
    }

    fn key(&self) -> Vec<u64> {
        self.coords.iter().map(|v| v.to_bits()).collect()
    }

    fn dominated_by(&self, other: &Atom) -> bool {
        self.coords.iter().zip(&other.coords).all(|(a, b)| a <= b)
    }
}

pub fn tsirelson_materialize(n: usize, caps: &Caps) -> Result<NormDescriptor> {
    if n == 0 {
        return Err(Error::InvalidDescriptor("Tsirelson dimension must be positive".into()));
    }
    if n > caps.tsirelson {
        return Err(Error::CapExceeded {
            what: "Tsirelson",
            value: n,
            cap: caps.tsirelson,
        });
    }
    let atoms = saturate(n);
    // Coordinate functionals are implicit in the polyhedral norm.
    let rows: Vec<Vec<f64>> = atoms.into_iter().filter(|a| a.lo != a.hi).map(|a| a.coords).collect();
    let exact = rows
        .iter()
        .map(|r| r.iter().map(|&v| rational_from_f64(v)).collect())
        .collect();
    Ok(NormDescriptor::Tsirelson {
        dim: n,
        atoms: AtomSet {
            rows,
            exact: Some(exact),
        },
    })
}

fn saturate(n: usize) -> Vec<Atom> {
    let mut atoms: Vec<Atom> = (0..n)
        .map(|i| {
            let mut c = vec![0.0; n];
            c[i] = 1.0;
            Atom::new(c)
        })
        .collect();
    loop {
        // partial[s][j]: sums of at most j successive atoms starting at or
        // after s (0-based), pruned within equal spans.
        let mut partial: Vec<Vec<Vec<Atom>>> = vec![vec![Vec::new(); n + 1]; n + 1];
        // More than n - s blocks cannot fit after s, so j is capped there.
        let cap = |s: usize, j: usize| j.min(n - s);
        for s in (0..n).rev() {
            for j in 1..=n - s {
                let mut cur = if s + 1 < n {
                    partial[s + 1][cap(s + 1, j)].clone()
                } else {
                    Vec::new()
                };
                for f in atoms.iter().filter(|a| a.lo == s) {
                    cur.push(f.clone());
                    if j > 1 && f.hi + 1 < n {
                        for g in &partial[f.hi + 1][cap(f.hi + 1, j - 1)] {
                            let c = f.coords.iter().zip(&g.coords).map(|(a, b)| a + b).collect();
                            cur.push(Atom::new(c));
                        }
                    }
                }
                partial[s][j] = prune_same_span(cur);
            }
        }
        let mut next = atoms.clone();
        // k blocks need min supp >= k, 1-based.
        for k in 2..=n {
            for p in &partial[k - 1][cap(k - 1, k)] {
                next.push(Atom::new(p.coords.iter().map(|v| v / 2.0).collect()));
            }
        }
        let next = prune_same_span(next);
        if same_set(&next, &atoms) {
            break;
        }
        atoms = next;
    }
    let mut atoms = prune(atoms);
    atoms.sort_by(|a, b| {
        (a.lo, a.hi).cmp(&(b.lo, b.hi)).then_with(|| {
            b.coords
                .iter()
                .zip(&a.coords)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    atoms
}

fn same_set(a: &[Atom], b: &[Atom]) -> bool {
    let ka: HashSet<Vec<u64>> = a.iter().map(Atom::key).collect();
    let kb: HashSet<Vec<u64>> = b.iter().map(Atom::key).collect();
    ka == kb
}

/// Keeps atoms not dominated by another atom with the same support span; a
/// dominated atom can be swapped for its dominator in any successive sum.
fn prune_same_span(atoms: Vec<Atom>) -> Vec<Atom> {
    let mut buckets: HashMap<(usize, usize), Vec<Atom>> = HashMap::new();
    let mut seen = HashSet::new();
    for a in atoms {
        if seen.insert(a.key()) {
            buckets.entry((a.lo, a.hi)).or_default().push(a);
        }
    }
    let mut spans: Vec<(usize, usize)> = buckets.keys().copied().collect();
    spans.sort_unstable();
    spans
        .into_iter()
        .flat_map(|k| prune(buckets.remove(&k).unwrap_or_default()))
        .collect()
}

/// Drops atoms coordinatewise dominated by another, keeping one copy of equal
/// atoms. Candidates are scanned by decreasing mass, so a dominator is always
/// among the atoms already kept.
fn prune(atoms: Vec<Atom>) -> Vec<Atom> {
    let mut order: Vec<(f64, Atom)> = atoms.into_iter().map(|a| (a.coords.iter().sum::<f64>(), a)).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut kept: Vec<Atom> = Vec::new();
    for (_, a) in order {
        if !kept.iter().any(|b| a.dominated_by(b)) {
            kept.push(a);
        }
    }
    kept
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Direct evaluation of the implicit equation
    /// `|x| = max(|x|_inf, 1/2 max sum_j |E_j x|)` restricted to intervals.
    pub(crate) fn implicit_norm(x: &[f64]) -> f64 {
        let n = x.len();
        if n == 0 {
            return 0.0;
        }
        let mut memo_t = HashMap::new();
        let mut memo_q = HashMap::new();
        t(x, 1, n, &mut memo_t, &mut memo_q)
    }

    type MemoT = HashMap<(usize, usize), f64>;
    type MemoQ = HashMap<(usize, usize, usize), f64>;

    // Indices are 1-based and inclusive.
    fn t(x: &[f64], a: usize, b: usize, mt: &mut MemoT, mq: &mut MemoQ) -> f64 {
        if a > b {
            return 0.0;
        }
        if let Some(v) = mt.get(&(a, b)) {
            return *v;
        }
        let mut best = x[a - 1..b].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 2..=b {
            let s = a.max(k);
            if s >= b {
                break;
            }
            // At least two nonempty blocks, so every subinterval is proper.
            for end in s..b {
                let v = t(x, s, end, mt, mq) + q(x, end + 1, b, k - 1, mt, mq);
                best = best.max(0.5 * v);
            }
        }
        mt.insert((a, b), best);
        best
    }

    /// Best sum of `t` over at most `k` consecutive blocks covering `[s, b]`.
    fn q(x: &[f64], s: usize, b: usize, k: usize, mt: &mut MemoT, mq: &mut MemoQ) -> f64 {
        if s > b {
            return 0.0;
        }
        if let Some(v) = mq.get(&(s, b, k)) {
            return *v;
        }
        let mut best = t(x, s, b, mt, mq);
        if k > 1 {
            for end in s..b {
                let v = t(x, s, end, mt, mq) + q(x, end + 1, b, k - 1, mt, mq);
                best = best.max(v);
            }
        }
        mq.insert((s, b, k), best);
        best
    }

    fn norm(n: usize) -> NormDescriptor {
        tsirelson_materialize(n, &Caps::default()).unwrap()
    }

    #[test]
    fn dimension_one_is_absolute_value() {
        let s = norm(1);
        assert_eq!(s.value(&[-2.5]), 2.5);
    }

    #[test]
    fn dimension_three_has_pair_atom() {
        let NormDescriptor::Tsirelson { atoms, .. } = norm(3) else {
            unreachable!()
        };
        assert!(atoms.rows.contains(&vec![0.0, 0.5, 0.5]));
    }

    #[test]
    fn admissible_triple_in_dimension_six() {
        let s = norm(6);
        let x = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        assert_eq!(s.value(&x), 1.5);
        assert_eq!(implicit_norm(&x), 1.5);
    }

    #[test]
    fn matches_implicit_equation_on_indicators_and_samples() {
        for n in [4, 6, 8] {
            let s = norm(n);
            for mask in 1u64..(1 << n) {
                let x: Vec<f64> = (0..n).map(|i| ((mask >> i) & 1) as f64).collect();
                assert!((s.value(&x) - implicit_norm(&x)).abs() < 1e-12, "n={n} mask={mask:b}");
            }
            for t in 0..300u64 {
                let x: Vec<f64> = (0..n as u64)
                    .map(|i| (((t * 31 + i * 17) * 2654435761) % 1000) as f64 / 500.0 - 1.0)
                    .collect();
                assert!((s.value(&x) - implicit_norm(&x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(
            tsirelson_materialize(13, &Caps::default()),
            Err(Error::CapExceeded { .. })
        ));
    }
}
