//! The disjoint-selection seminorm
//! `N(x) = max { sum_i w(|A_i|) <|x|, 1_{A_i}> : A_1..A_m pairwise disjoint members }`.
//!
//! Weights are indexed by set size and must be nonincreasing in the size. When
//! the member list is every nonempty subset, an optimal selection uses
//! consecutive blocks of the decreasing rearrangement of `|x|`, so an
//! `O(m n^2)` dynamic program replaces the search.

use serde::{Deserialize, Serialize};

use super::vector::IndexSet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisjointFamily {
    pub dim: usize,
    pub sets: Vec<IndexSet>,
    /// `weights_by_size[k - 1]` is the weight of a member of size `k`.
    pub weights_by_size: Vec<f64>,
    /// Maximum number of members in a selection.
    pub m: usize,
    /// True when `sets` is every nonempty subset of the coordinates.
    #[serde(default)]
    pub full: bool,
}

/// Best selection and its value.
#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub value: f64,
    pub sets: Vec<IndexSet>,
}

impl DisjointFamily {
    pub fn weight(&self, size: usize) -> f64 {
        if size == 0 {
            0.0
        } else {
            self.weights_by_size[size - 1]
        }
    }

    pub fn best(&self, x: &[f64]) -> Selection {
        if self.full {
            self.best_full(x)
        } else {
            self.best_search(x)
        }
    }

    /// Block dynamic program over the decreasing rearrangement.
    pub(crate) fn best_full(&self, x: &[f64]) -> Selection {
        let n = x.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()).then(a.cmp(&b)));
        let mut prefix = vec![0.0; n + 1];
        for (j, &i) in order.iter().enumerate() {
            prefix[j + 1] = prefix[j] + x[i].abs();
        }
        // best[t][j]: t blocks partitioning the first j sorted entries.
        let neg = f64::NEG_INFINITY;
        let mut best = vec![vec![neg; n + 1]; self.m + 1];
        let mut from = vec![vec![0usize; n + 1]; self.m + 1];
        best[0][0] = 0.0;
        for t in 1..=self.m {
            for j in 1..=n {
                for i in 0..j {
                    if best[t - 1][i] == neg {
                        continue;
                    }
                    let v = best[t - 1][i] + self.weight(j - i) * (prefix[j] - prefix[i]);
                    if v > best[t][j] {
                        best[t][j] = v;
                        from[t][j] = i;
                    }
                }
            }
        }
        let (mut bt, mut bj, mut bv) = (0, 0, 0.0);
        for (t, row) in best.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > bv {
                    (bt, bj, bv) = (t, j, v);
                }
            }
        }
        let mut sets = Vec::new();
        while bt > 0 {
            let i = from[bt][bj];
            sets.push(IndexSet::from_indices(order[i..bj].iter().copied()));
            bj = i;
            bt -= 1;
        }
        sets.reverse();
        Selection { value: bv, sets }
    }

    /// Branch and bound over members sorted by their individual value.
    pub(crate) fn best_search(&self, x: &[f64]) -> Selection {
        let vals: Vec<f64> = self
            .sets
            .iter()
            .map(|a| self.weight(a.len()) * a.iter().map(|i| x[i].abs()).sum::<f64>())
            .collect();
        let mut order: Vec<usize> = (0..self.sets.len()).filter(|&i| vals[i] > 0.0).collect();
        order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
        let mut state = Search {
            fam: self,
            vals: &vals,
            order: &order,
            best: 0.0,
            best_sets: Vec::new(),
            stack: Vec::new(),
        };
        state.dfs(0, IndexSet::EMPTY, 0.0);
        Selection {
            value: state.best,
            sets: state.best_sets,
        }
    }

    /// Exhaustive reference used by tests: every selection of at most `m`
    /// pairwise disjoint members.
    pub fn best_bruteforce(&self, x: &[f64]) -> f64 {
        fn rec(f: &DisjointFamily, x: &[f64], start: usize, used: IndexSet, left: usize) -> f64 {
            if left == 0 {
                return 0.0;
            }
            let mut best = 0.0f64;
            for (k, a) in f.sets.iter().enumerate().skip(start) {
                if !a.is_disjoint(used) {
                    continue;
                }
                let v = f.weight(a.len()) * a.iter().map(|i| x[i].abs()).sum::<f64>();
                best = best.max(v + rec(f, x, k + 1, used.union(*a), left - 1));
            }
            best
        }
        rec(self, x, 0, IndexSet::EMPTY, self.m)
    }
}

struct Search<'a> {
    fam: &'a DisjointFamily,
    vals: &'a [f64],
    order: &'a [usize],
    best: f64,
    best_sets: Vec<IndexSet>,
    stack: Vec<IndexSet>,
}

impl Search<'_> {
    fn dfs(&mut self, start: usize, used: IndexSet, acc: f64) {
        if acc > self.best {
            self.best = acc;
            self.best_sets = self.stack.clone();
        }
        let left = self.fam.m - self.stack.len();
        if left == 0 {
            return;
        }
        for pos in start..self.order.len() {
            let idx = self.order[pos];
            let v = self.vals[idx];
            if acc + v * left as f64 <= self.best {
                break;
            }
            let a = self.fam.sets[idx];
            if !a.is_disjoint(used) {
                continue;
            }
            self.stack.push(a);
            self.dfs(pos + 1, used.union(a), acc + v);
            self.stack.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_subsets(n: usize) -> Vec<IndexSet> {
        (1u64..(1 << n)).map(IndexSet).collect()
    }

    #[test]
    fn full_dp_matches_search_and_bruteforce() {
        let n = 6;
        let weights: Vec<f64> = (1..=n).map(|k| (k as f64).sqrt() / k as f64).collect();
        let full = DisjointFamily {
            dim: n,
            sets: all_subsets(n),
            weights_by_size: weights,
            m: 3,
            full: true,
        };
        let search = DisjointFamily {
            full: false,
            ..full.clone()
        };
        let xs = [
            vec![1.0, 0.5, 0.25, 0.9, 0.0, 0.3],
            vec![1.0; 6],
            vec![0.0, 0.0, 2.0, 0.0, 0.0, 0.0],
            vec![0.7, -0.2, 0.4, 0.4, -1.0, 0.05],
        ];
        for x in &xs {
            let a = full.best(x).value;
            let b = search.best(x).value;
            let c = full.best_bruteforce(x);
            assert!((a - c).abs() < 1e-12, "{a} vs {c}");
            assert!((b - c).abs() < 1e-12, "{b} vs {c}");
        }
    }

    #[test]
    fn selection_is_disjoint_and_attains_value() {
        let n = 5;
        let fam = DisjointFamily {
            dim: n,
            sets: all_subsets(n).into_iter().filter(|a| a.len() <= 2).collect(),
            weights_by_size: vec![1.0, 0.75, 0.6, 0.5, 0.45],
            m: 2,
            full: false,
        };
        let x = [0.3, 0.9, 0.1, 0.8, 0.5];
        let sel = fam.best(&x);
        let mut used = IndexSet::EMPTY;
        let mut v = 0.0;
        for a in &sel.sets {
            assert!(a.is_disjoint(used));
            used = used.union(*a);
            v += fam.weight(a.len()) * a.iter().map(|i| x[i]).sum::<f64>();
        }
        assert!((v - sel.value).abs() < 1e-12);
        assert!((sel.value - fam.best_bruteforce(&x)).abs() < 1e-12);
    }
}
