use serde::{Deserialize, Serialize};

use super::vector::IndexSet;
use crate::error::{Error, Result};

/// Finite collection of subsets of `{1..dim}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetFamily {
    pub dim: usize,
    pub sets: Vec<IndexSet>,
}

impl SetFamily {
    pub fn new(dim: usize, sets: Vec<IndexSet>) -> Result<Self> {
        if dim > 64 {
            return Err(Error::OutOfRange(format!("dimension {dim} exceeds 64")));
        }
        let full = IndexSet::full(dim);
        if let Some(a) = sets.iter().find(|a| !a.is_subset(full)) {
            return Err(Error::OutOfRange(format!("set {a} is not inside 1..{dim}")));
        }
        Ok(Self { dim, sets })
    }

    /// Every nonempty subset.
    pub fn all_subsets(dim: usize) -> Self {
        Self {
            dim,
            sets: (1u64..(1u64 << dim)).map(IndexSet).collect(),
        }
    }

    /// Nonempty `A` with `|A| <= min A` (1-based).
    pub fn schreier(dim: usize) -> Self {
        Self {
            dim,
            sets: (1u64..(1u64 << dim))
                .map(IndexSet)
                .filter(|a| a.is_schreier())
                .collect(),
        }
    }

    /// Singletons together with the initial segments `{1..k}`.
    pub fn initial_segments(dim: usize) -> Self {
        let mut sets: Vec<IndexSet> = (0..dim).map(IndexSet::singleton).collect();
        sets.extend((1..dim).map(|k| IndexSet::interval(0, k)));
        Self { dim, sets }
    }

    /// Sizes in `1..=dim` with no member of that size.
    pub fn missing_sizes(&self) -> Vec<usize> {
        let mut present = vec![false; self.dim + 1];
        for a in &self.sets {
            present[a.len()] = true;
        }
        (1..=self.dim).filter(|&k| !present[k]).collect()
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}
