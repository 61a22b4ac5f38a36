use num_rational::BigRational;

use super::family::DisjointFamily;
use super::haar;
use super::lp::rational_from_f64;
use super::vector::{sorted_moduli, CoefVector, IndexSet};
use crate::config::Caps;
use crate::error::{Error, Result};

/// A finite list of nonnegative functionals, optionally with exact values.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct AtomSet {
    pub rows: Vec<Vec<f64>>,
    /// Exact rational form of `rows`, present when the atoms were given as
    /// rationals.
    pub exact: Option<Vec<Vec<BigRational>>>,
}

impl AtomSet {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        Self { rows, exact: None }
    }

    pub fn from_exact(exact: Vec<Vec<BigRational>>) -> Self {
        use num_traits::ToPrimitive;
        let rows = exact
            .iter()
            .map(|r| r.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect())
            .collect();
        Self {
            rows,
            exact: Some(exact),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub(crate) fn exact_rows(&self) -> Vec<Vec<BigRational>> {
        match &self.exact {
            Some(e) => e.clone(),
            None => self
                .rows
                .iter()
                .map(|r| r.iter().map(|&v| rational_from_f64(v)).collect())
                .collect(),
        }
    }

    /// Largest pairing `<|x|, f>` and the index of the first atom attaining it.
    pub(crate) fn best(&self, absx: &[f64]) -> (f64, Option<usize>) {
        let mut best = (0.0, None);
        for (j, f) in self.rows.iter().enumerate() {
            let v: f64 = f.iter().zip(absx).map(|(a, b)| a * b).sum();
            if v > best.0 {
                best = (v, Some(j));
            }
        }
        best
    }
}

/// Algebraic description of a norm on `R^n` with respect to the unit basis.
///
/// Every variant except a bare [`NormDescriptor::HaarLp`] is 1-unconditional.
#[derive(Clone, Debug, PartialEq)]
pub enum NormDescriptor {
    /// `l_p^n`, `1 <= p <= inf`.
    Lp {
        dim: usize,
        p: f64,
    },
    /// `max(|x|_inf, max_j <|x|, f_j>)`.
    Polyhedral {
        dim: usize,
        atoms: AtomSet,
    },
    /// Truncated Tsirelson norm, held as its saturated atom set.
    Tsirelson {
        dim: usize,
        atoms: AtomSet,
    },
    /// Span of the first `2^level` Haar functions in `L_p[0,1]`.
    HaarLp {
        p: f64,
        level: u32,
    },
    /// `max over sign patterns eps of base(eps x)`.
    UnconditionalHull {
        base: Box<NormDescriptor>,
    },
    MaxOf {
        parts: Vec<NormDescriptor>,
    },
    /// `sum_i w_i N_i(x)`; parts may be seminorms as long as the sum is a norm.
    ScaledSum {
        parts: Vec<(f64, NormDescriptor)>,
    },
    /// `max(base(x), max_j <|x|, f_j>)`.
    AugmentedPolyhedral {
        base: Box<NormDescriptor>,
        atoms: AtomSet,
    },
    /// `max_k w_k S_k(|x|)` where `S_k` sums the `k` largest moduli.
    TopK {
        dim: usize,
        weights: Vec<f64>,
    },
    /// Best disjoint selection from a set family; a seminorm on its own.
    DisjointFamily(DisjointFamily),
}

impl NormDescriptor {
    pub fn lp(dim: usize, p: f64) -> Self {
        Self::Lp { dim, p }
    }

    pub fn polyhedral(dim: usize, atoms: Vec<Vec<f64>>) -> Self {
        Self::Polyhedral {
            dim,
            atoms: AtomSet::from_rows(atoms),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Lp { dim, .. }
            | Self::Polyhedral { dim, .. }
            | Self::Tsirelson { dim, .. }
            | Self::TopK { dim, .. } => *dim,
            Self::HaarLp { level, .. } => 1usize << level,
            Self::UnconditionalHull { base } | Self::AugmentedPolyhedral { base, .. } => base.dim(),
            Self::MaxOf { parts } => parts.first().map_or(0, |p| p.dim()),
            Self::ScaledSum { parts } => parts.first().map_or(0, |p| p.1.dim()),
            Self::DisjointFamily(f) => f.dim,
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            Self::Lp { .. } => "lp",
            Self::Polyhedral { .. } => "polyhedral",
            Self::Tsirelson { .. } => "tsirelson",
            Self::HaarLp { .. } => "haar_lp",
            Self::UnconditionalHull { .. } => "unconditional_hull",
            Self::MaxOf { .. } => "max_of",
            Self::ScaledSum { .. } => "scaled_sum",
            Self::AugmentedPolyhedral { .. } => "augmented_polyhedral",
            Self::TopK { .. } => "top_k",
            Self::DisjointFamily(_) => "disjoint_family",
        }
    }

    /// True when 1-unconditionality holds by construction.
    pub fn is_unconditional(&self) -> bool {
        match self {
            Self::HaarLp { .. } => false,
            Self::UnconditionalHull { .. } => true,
            Self::MaxOf { parts } => parts.iter().all(|p| p.is_unconditional()),
            Self::ScaledSum { parts } => parts.iter().all(|p| p.1.is_unconditional()),
            Self::AugmentedPolyhedral { base, .. } => base.is_unconditional(),
            _ => true,
        }
    }

    /// Checks structural invariants: consistent dimensions, nonnegative
    /// finite atoms and weights, admissible exponents, caps, and `N(e_i) > 0`.
    pub fn validate(&self, caps: &Caps) -> Result<()> {
        self.validate_parts(caps)?;
        let n = self.dim();
        if n == 0 {
            return Err(Error::InvalidDescriptor("dimension must be positive".into()));
        }
        for i in 0..n {
            if self.value(CoefVector::unit(n, i).as_slice()) <= 0.0 {
                return Err(Error::InvalidDescriptor(format!(
                    "coordinate {} is not covered (N(e_i) = 0)",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    fn validate_parts(&self, caps: &Caps) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDescriptor(m));
        let check_atoms = |dim: usize, atoms: &AtomSet| -> Result<()> {
            for (j, a) in atoms.rows.iter().enumerate() {
                if a.len() != dim {
                    return Err(Error::InvalidDescriptor(format!(
                        "atom {} has length {} (dimension {dim})",
                        j + 1,
                        a.len()
                    )));
                }
                if a.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::InvalidDescriptor(format!(
                        "atom {} must be finite and coordinatewise nonnegative",
                        j + 1
                    )));
                }
            }
            Ok(())
        };
        match self {
            Self::Lp { p, .. } => {
                if p.is_nan() || *p < 1.0 {
                    return bad(format!("l_p needs p >= 1, got {p}"));
                }
            }
            Self::Polyhedral { dim, atoms } | Self::Tsirelson { dim, atoms } => check_atoms(*dim, atoms)?,
            Self::HaarLp { p, level } => {
                if !(*p > 1.0 && p.is_finite()) {
                    return bad(format!("Haar system needs 1 < p < inf, got {p}"));
                }
                if *level > 20 {
                    return bad(format!("Haar level {level} too large"));
                }
            }
            Self::UnconditionalHull { base } => {
                base.validate_parts(caps)?;
                if base.dim() > caps.sign_hull {
                    return Err(Error::CapExceeded {
                        what: "sign-hull",
                        value: base.dim(),
                        cap: caps.sign_hull,
                    });
                }
            }
            Self::MaxOf { parts } => {
                if parts.is_empty() {
                    return bad("max_of needs at least one part".into());
                }
                let n = parts[0].dim();
                for p in parts {
                    p.validate_parts(caps)?;
                    if p.dim() != n {
                        return bad("max_of parts have different dimensions".into());
                    }
                }
            }
            Self::ScaledSum { parts } => {
                if parts.is_empty() {
                    return bad("scaled_sum needs at least one part".into());
                }
                let n = parts[0].1.dim();
                for (w, p) in parts {
                    if !(w.is_finite() && *w >= 0.0) {
                        return bad(format!("scaled_sum weight {w} must be finite and >= 0"));
                    }
                    p.validate_parts(caps)?;
                    if p.dim() != n {
                        return bad("scaled_sum parts have different dimensions".into());
                    }
                }
            }
            Self::AugmentedPolyhedral { base, atoms } => {
                base.validate_parts(caps)?;
                check_atoms(base.dim(), atoms)?;
            }
            Self::TopK { dim, weights } => {
                if weights.len() != *dim {
                    return bad("top_k needs one weight per size".into());
                }
                if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                    return bad("top_k weights must be finite and >= 0".into());
                }
            }
            Self::DisjointFamily(f) => {
                if f.weights_by_size.len() != f.dim {
                    return bad("disjoint_family needs one weight per size".into());
                }
                if f.weights_by_size.iter().any(|w| !w.is_finite() || *w < 0.0) {
                    return bad("disjoint_family weights must be finite and >= 0".into());
                }
                if f.dim > caps.dp {
                    return Err(Error::CapExceeded {
                        what: "DP",
                        value: f.dim,
                        cap: caps.dp,
                    });
                }
                if f.sets
                    .iter()
                    .any(|a| a.is_empty() || !a.is_subset(IndexSet::full(f.dim)))
                {
                    return bad("disjoint_family members must be nonempty subsets of 1..n".into());
                }
            }
        }
        Ok(())
    }

    /// Norm value; `x.len()` must equal `self.dim()`.
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Self::Lp { p, .. } => lp_norm(x, *p),
            Self::Polyhedral { atoms, .. } | Self::Tsirelson { atoms, .. } => {
                let absx: Vec<f64> = x.iter().map(|v| v.abs()).collect();
                let sup = absx.iter().fold(0.0f64, |m, v| m.max(*v));
                sup.max(atoms.best(&absx).0)
            }
            Self::HaarLp { p, level } => haar::step_norm(&haar::synthesize(*level, x, *p), *p),
            Self::UnconditionalHull { base } => hull_best(base, x).0,
            Self::MaxOf { parts } => parts.iter().map(|p| p.value(x)).fold(0.0, f64::max),
            Self::ScaledSum { parts } => parts
                .iter()
                .filter(|(w, _)| *w > 0.0)
                .map(|(w, p)| w * p.value(x))
                .sum(),
            Self::AugmentedPolyhedral { base, atoms } => {
                let absx: Vec<f64> = x.iter().map(|v| v.abs()).collect();
                base.value(x).max(atoms.best(&absx).0)
            }
            Self::TopK { weights, .. } => top_k_best(weights, x).0,
            Self::DisjointFamily(f) => f.best(x).value,
        }
    }

    /// Checked evaluation of `N(x)`.
    pub fn norm(&self, x: &CoefVector) -> Result<f64> {
        x.check_dim(self.dim())?;
        Ok(self.value(x.as_slice()))
    }

    /// Complete atom list when the norm is polyhedral of manageable size:
    /// `N(x) = max_j <|x|, f_j>` over the returned rows.
    pub fn flat_atoms(&self) -> Option<Vec<Vec<f64>>> {
        const MAX_ATOMS: usize = 1 << 15;
        let n = self.dim();
        let coords = || -> Vec<Vec<f64>> { (0..n).map(|i| CoefVector::unit(n, i).into_inner()).collect() };
        match self {
            Self::Lp { p, .. } if *p == 1.0 => Some(vec![vec![1.0; n]]),
            Self::Lp { p, .. } if p.is_infinite() => Some(coords()),
            Self::Lp { .. } | Self::HaarLp { .. } | Self::UnconditionalHull { .. } => None,
            Self::Polyhedral { atoms, .. } | Self::Tsirelson { atoms, .. } => {
                let mut out = coords();
                out.extend(atoms.rows.iter().cloned());
                Some(out)
            }
            Self::MaxOf { parts } => {
                let mut out = Vec::new();
                for p in parts {
                    out.extend(p.flat_atoms()?);
                }
                (out.len() <= MAX_ATOMS).then_some(out)
            }
            Self::AugmentedPolyhedral { base, atoms } => {
                let mut out = base.flat_atoms()?;
                out.extend(atoms.rows.iter().cloned());
                (out.len() <= MAX_ATOMS).then_some(out)
            }
            Self::ScaledSum { parts } => {
                let mut acc: Vec<Vec<f64>> = vec![vec![0.0; n]];
                for (w, p) in parts.iter().filter(|(w, _)| *w > 0.0) {
                    let atoms = p.flat_atoms()?;
                    if acc.len() * atoms.len() > MAX_ATOMS {
                        return None;
                    }
                    acc = acc
                        .iter()
                        .flat_map(|a| {
                            atoms
                                .iter()
                                .map(move |f| a.iter().zip(f).map(|(u, v)| u + w * v).collect::<Vec<f64>>())
                        })
                        .collect();
                }
                Some(acc)
            }
            Self::TopK { weights, .. } => {
                if n > 14 {
                    return None;
                }
                let mut out = Vec::new();
                for mask in 1u64..(1u64 << n) {
                    let s = IndexSet(mask);
                    let w = weights[s.len() - 1];
                    if w > 0.0 {
                        out.push(CoefVector::indicator(n, s).scale(w).into_inner());
                    }
                }
                Some(out)
            }
            Self::DisjointFamily(_) => None,
        }
    }

    /// Exact counterpart of [`flat_atoms`](Self::flat_atoms); stored rational
    /// atoms are used verbatim, floats are converted exactly.
    pub fn flat_atoms_exact(&self) -> Option<Vec<Vec<BigRational>>> {
        use num_traits::{One, Zero};
        let n = self.dim();
        let coords = || -> Vec<Vec<BigRational>> {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            if i == j {
                                BigRational::one()
                            } else {
                                BigRational::zero()
                            }
                        })
                        .collect()
                })
                .collect()
        };
        match self {
            Self::Polyhedral { atoms, .. } | Self::Tsirelson { atoms, .. } => {
                let mut out = coords();
                out.extend(atoms.exact_rows());
                Some(out)
            }
            Self::MaxOf { parts } => {
                let mut out = Vec::new();
                for p in parts {
                    out.extend(p.flat_atoms_exact()?);
                }
                Some(out)
            }
            Self::AugmentedPolyhedral { base, atoms } => {
                let mut out = base.flat_atoms_exact()?;
                out.extend(atoms.exact_rows());
                Some(out)
            }
            _ => self.flat_atoms().map(|rows| {
                rows.iter()
                    .map(|r| r.iter().map(|&v| rational_from_f64(v)).collect())
                    .collect()
            }),
        }
    }

    /// Structural scaling `c N`.
    pub fn scaled(&self, c: f64) -> Self {
        Self::ScaledSum {
            parts: vec![(c, self.clone())],
        }
    }
}

pub(crate) fn lp_norm(x: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        x.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else if p == 1.0 {
        x.iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else {
        let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if m == 0.0 {
            return 0.0;
        }
        m * x.iter().map(|v| (v.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Best value and maximizing size `k` (1-based; 0 when `x = 0`).
pub(crate) fn top_k_best(weights: &[f64], x: &[f64]) -> (f64, usize) {
    let m = sorted_moduli(x);
    let mut s = 0.0;
    let mut best = (0.0, 0);
    for (k, v) in m.iter().enumerate() {
        s += v;
        let val = weights[k] * s;
        if val > best.0 {
            best = (val, k + 1);
        }
    }
    best
}

/// Best sign pattern for the hull; the first coordinate's sign is fixed.
pub(crate) fn hull_best(base: &NormDescriptor, x: &[f64]) -> (f64, Vec<f64>) {
    let n = x.len();
    let mut best = (f64::NEG_INFINITY, vec![1.0; n]);
    let patterns = if n == 0 { 1u64 } else { 1u64 << (n - 1) };
    let mut y = vec![0.0; n];
    for mask in 0..patterns {
        let signs: Vec<f64> = (0..n)
            .map(|i| if i > 0 && mask >> (i - 1) & 1 == 1 { -1.0 } else { 1.0 })
            .collect();
        for i in 0..n {
            y[i] = x[i] * signs[i];
        }
        let v = base.value(&y);
        if v > best.0 {
            best = (v, signs);
        }
    }
    best
}
