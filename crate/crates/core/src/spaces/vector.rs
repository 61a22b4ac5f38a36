use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients of a vector with respect to the basis `(e_i)`.
///
/// Always finite. Coordinates are 0-based in code; user-facing output uses
/// 1-based indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct CoefVector(Vec<f64>);

impl CoefVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(i) = coords.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidVector(format!("coordinate {} is not finite", i + 1)));
        }
        Ok(Self(coords))
    }

    /// Wraps coordinates already known to be finite.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!(coords.iter().all(|v| v.is_finite()));
        Self(coords)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn indicator(n: usize, set: IndexSet) -> Self {
        Self((0..n).map(|i| if set.contains(i) { 1.0 } else { 0.0 }).collect())
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn abs(&self) -> Self {
        Self(self.0.iter().map(|v| v.abs()).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&v| v >= 0.0)
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn support(&self) -> IndexSet {
        IndexSet::from_indices(self.0.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i))
    }

    pub fn dot(&self, other: &CoefVector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(self.0.iter().map(|v| v * c).collect())
    }

    pub fn add(&self, other: &CoefVector) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &CoefVector) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// Coordinatewise product with a sign (or any multiplier) pattern.
    pub fn twist(&self, signs: &[f64]) -> Self {
        Self(self.0.iter().zip(signs).map(|(a, s)| a * s).collect())
    }

    /// `P_A x`: keeps the coordinates in `set`.
    pub fn project(&self, set: IndexSet) -> Self {
        Self(
            self.0
                .iter()
                .enumerate()
                .map(|(i, &v)| if set.contains(i) { v } else { 0.0 })
                .collect(),
        )
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.len(),
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for CoefVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<CoefVector> for Vec<f64> {
    fn from(v: CoefVector) -> Self {
        v.0
    }
}

impl Index<usize> for CoefVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Moduli sorted in decreasing order.
pub(crate) fn sorted_moduli(x: &[f64]) -> Vec<f64> {
    let mut m: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    m.sort_by(|a, b| b.total_cmp(a));
    m
}

/// A subset of `{0, .., 63}` stored as a bitmask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet(pub u64);

impl IndexSet {
    pub const EMPTY: IndexSet = IndexSet(0);

    pub fn full(n: usize) -> Self {
        assert!(n <= 64);
        if n == 64 {
            IndexSet(u64::MAX)
        } else {
            IndexSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        IndexSet(1u64 << i)
    }

    /// `{lo, .., hi}` inclusive, 0-based.
    pub fn interval(lo: usize, hi: usize) -> Self {
        if lo > hi {
            return Self::EMPTY;
        }
        IndexSet(Self::full(hi + 1).0 & !Self::full(lo).0)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Self {
        IndexSet(it.into_iter().fold(0u64, |m, i| m | (1u64 << i)))
    }

    /// Builds from 1-based indices as written in documents and on the CLI.
    pub fn from_one_based(idx: &[usize]) -> Result<Self> {
        if idx.iter().any(|&i| i == 0 || i > 64) {
            return Err(Error::OutOfRange("set members must lie in 1..=64".into()));
        }
        Ok(Self::from_indices(idx.iter().map(|i| i - 1)))
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 >> i & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn min(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn max(self) -> Option<usize> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }

    pub fn union(self, o: IndexSet) -> Self {
        IndexSet(self.0 | o.0)
    }

    pub fn intersection(self, o: IndexSet) -> Self {
        IndexSet(self.0 & o.0)
    }

    pub fn difference(self, o: IndexSet) -> Self {
        IndexSet(self.0 & !o.0)
    }

    pub fn is_subset(self, o: IndexSet) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn is_disjoint(self, o: IndexSet) -> bool {
        self.0 & o.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    pub fn to_one_based(self) -> Vec<usize> {
        self.iter().map(|i| i + 1).collect()
    }

    /// Schreier sets: `|A| <= min A` with 1-based indexing.
    pub fn is_schreier(self) -> bool {
        match self.min() {
            None => true,
            Some(m) => self.len() <= m + 1,
        }
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

impl Serialize for IndexSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for IndexSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        IndexSet::from_one_based(&v).map_err(serde::de::Error::custom)
    }
}
