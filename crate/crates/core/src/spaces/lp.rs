//! Dual simplex for the covering program behind polyhedral dual norms.
//!
//! Given nonnegative atoms `f_1..f_K` in `R^n` and a nonnegative target `c`,
//! solves
//!
//! ```text
//!   min  sum_j lambda_j   s.t.  sum_j lambda_j f_j >= c,  lambda >= 0
//! ```
//!
//! whose LP dual is `max <c, x>` over `{x >= 0 : <f_j, x> <= 1}`. All costs are
//! one, so the slack basis is dual feasible and no phase one is needed. The
//! dual solution is read off the reduced costs of the slack columns.
//!
//! The solver is generic over [`LpScalar`] so the same pivoting code runs in
//! `f64` and in exact `BigRational` arithmetic. Pivoting uses the dual Bland
//! rule (leaving: smallest basic index among negative rows; entering: minimal
//! ratio, smallest column on ties), which rules out cycling in exact mode.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub trait LpScalar: Clone + Debug + PartialOrd {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    /// Strictly negative beyond the scalar's tolerance.
    fn is_neg(&self) -> bool;
    fn is_exact_zero(&self) -> bool;
    fn to_f64(&self) -> f64;
}

const PIVOT_EPS: f64 = 1e-12;

impl LpScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn is_neg(&self) -> bool {
        *self < -PIVOT_EPS
    }
    fn is_exact_zero(&self) -> bool {
        *self == 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl LpScalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
    fn is_exact_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn to_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Exact rational value of a finite `f64`.
pub fn rational_from_f64(v: f64) -> BigRational {
    BigRational::from_float(v).unwrap_or_else(<BigRational as Zero>::zero)
}

/// Parses `"3"`, `"-0.25"`, `"1/3"` or `"2.5e-1"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(p) => (&s[..p], s[p + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("{int_part}{frac_part}0").parse::<BigInt>().map_err(|_| bad())? / BigInt::from(10);
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(all);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -r } else { r })
}

#[derive(Clone, Debug)]
pub struct LpSolution<T> {
    /// Optimal `sum_j lambda_j`, equal to the dual norm.
    pub value: T,
    /// Optimal atom weights.
    pub lambda: Vec<T>,
    /// Optimal point of the dual program: `x >= 0`, `<f_j, x> <= 1`,
    /// `<c, x> = value`.
    pub point: Vec<T>,
    pub pivots: usize,
}

const MAX_PIVOTS: usize = 100_000;

/// Solves the covering program; `atoms[j]` and `target` must be nonnegative
/// and have equal length.
///
/// Only coordinates in the support of `target` constrain the program, so the
/// atoms are restricted to it and restricted atoms dominated by another one
/// are dropped before pivoting.
pub fn solve_cover<T: LpScalar>(atoms: &[Vec<T>], target: &[T]) -> Result<LpSolution<T>> {
    let n = target.len();
    if atoms.iter().any(|a| a.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: atoms.iter().map(|a| a.len()).find(|&l| l != n).unwrap_or(0),
        });
    }
    let support: Vec<usize> = (0..n).filter(|&i| !target[i].is_exact_zero()).collect();
    if let Some(&i) = support.iter().find(|&&i| atoms.iter().all(|a| a[i].is_exact_zero())) {
        return Err(Error::LpInfeasible(format!(
            "coordinate {} is not covered by any atom",
            i + 1
        )));
    }
    let (kept, reduced) = reduce_atoms(atoms, &support);
    let sub_target: Vec<T> = support.iter().map(|&i| target[i].clone()).collect();
    let sol = solve_reduced(&reduced, &sub_target)?;
    let mut lambda = vec![T::zero(); atoms.len()];
    for (j, l) in kept.into_iter().zip(sol.lambda) {
        lambda[j] = l;
    }
    let mut point = vec![T::zero(); n];
    for (&i, v) in support.iter().zip(sol.point) {
        point[i] = v;
    }
    Ok(LpSolution {
        value: sol.value,
        lambda,
        point,
        pivots: sol.pivots,
    })
}

/// Atoms restricted to `support`, without zero rows and without rows that are
/// coordinatewise below another kept row. Returns original indices alongside.
fn reduce_atoms<T: LpScalar>(atoms: &[Vec<T>], support: &[usize]) -> (Vec<usize>, Vec<Vec<T>>) {
    let mut order: Vec<(usize, Vec<T>, f64)> = atoms
        .iter()
        .enumerate()
        .map(|(j, a)| {
            let r: Vec<T> = support.iter().map(|&i| a[i].clone()).collect();
            let total = r.iter().map(T::to_f64).sum();
            (j, r, total)
        })
        .filter(|(_, r, _)| r.iter().any(|v| !v.is_exact_zero()))
        .collect();
    order.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
    let mut kept: Vec<usize> = Vec::new();
    let mut rows: Vec<Vec<T>> = Vec::new();
    for (j, r, _) in order {
        let dominated = rows.iter().any(|k| k.iter().zip(&r).all(|(u, v)| u >= v));
        if !dominated {
            kept.push(j);
            rows.push(r);
        }
    }
    (kept, rows)
}

fn solve_reduced<T: LpScalar>(atoms: &[Vec<T>], target: &[T]) -> Result<LpSolution<T>> {
    let n = target.len();
    let k = atoms.len();
    let width = k + n;
    // Row i: -sum_j f_j[i] lambda_j + s_i = -c_i.
    let mut rows: Vec<Vec<T>> = (0..n)
        .map(|i| {
            let mut r = Vec::with_capacity(width);
            r.extend(atoms.iter().map(|a| T::zero().sub(&a[i])));
            r.extend((0..n).map(|s| if s == i { T::one() } else { T::zero() }));
            r
        })
        .collect();
    let mut rhs: Vec<T> = target.iter().map(|c| T::zero().sub(c)).collect();
    let mut cost: Vec<T> = (0..width).map(|j| if j < k { T::one() } else { T::zero() }).collect();
    let mut basis: Vec<usize> = (k..width).collect();

    let mut pivots = 0usize;
    loop {
        let leaving = (0..n).filter(|&r| rhs[r].is_neg()).min_by_key(|&r| basis[r]);
        let Some(r) = leaving else { break };
        if pivots >= MAX_PIVOTS {
            return Err(Error::LpNoConvergence(pivots));
        }
        let mut entering: Option<(usize, T)> = None;
        for j in 0..width {
            let a = &rows[r][j];
            if !a.is_neg() {
                continue;
            }
            let ratio = cost[j].div(&T::zero().sub(a));
            match &entering {
                Some((_, best)) if ratio.partial_cmp(best) != Some(std::cmp::Ordering::Less) => {}
                _ => entering = Some((j, ratio)),
            }
        }
        let Some((c, _)) = entering else {
            return Err(Error::LpInfeasible(format!(
                "coordinate {} is not covered by any atom",
                r + 1
            )));
        };
        pivot(&mut rows, &mut rhs, &mut cost, r, c);
        basis[r] = c;
        pivots += 1;
    }

    let mut lambda = vec![T::zero(); k];
    let mut value = T::zero();
    for (r, &b) in basis.iter().enumerate() {
        if b < k {
            value = value.add(&rhs[r]);
            lambda[b] = rhs[r].clone();
        }
    }
    let point = (0..n).map(|i| cost[k + i].clone()).collect();
    Ok(LpSolution {
        value,
        lambda,
        point,
        pivots,
    })
}

fn pivot<T: LpScalar>(rows: &mut [Vec<T>], rhs: &mut [T], cost: &mut [T], r: usize, c: usize) {
    let p = rows[r][c].clone();
    for v in rows[r].iter_mut() {
        if !v.is_exact_zero() {
            *v = v.div(&p);
        }
    }
    rhs[r] = rhs[r].div(&p);
    let pivot_row = rows[r].clone();
    let pivot_rhs = rhs[r].clone();
    for (i, row) in rows.iter_mut().enumerate() {
        if i == r || row[c].is_exact_zero() {
            continue;
        }
        let f = row[c].clone();
        for (v, pv) in row.iter_mut().zip(&pivot_row) {
            if !pv.is_exact_zero() {
                *v = v.sub(&f.mul(pv));
            }
        }
        rhs[i] = rhs[i].sub(&f.mul(&pivot_rhs));
    }
    if !cost[c].is_exact_zero() {
        let f = cost[c].clone();
        for (v, pv) in cost.iter_mut().zip(&pivot_row) {
            if !pv.is_exact_zero() {
                *v = v.sub(&f.mul(pv));
            }
        }
    }
}

/// Float solve plus a weak-duality audit. Returns the solution and the
/// certified bracket `[<c,x>/max_j <f_j,x>, sum lambda]` around the optimum.
pub fn solve_cover_f64(atoms: &[Vec<f64>], target: &[f64]) -> Result<(LpSolution<f64>, f64, f64)> {
    let sol = solve_cover(atoms, target)?;
    let x: Vec<f64> = sol.point.iter().map(|v| v.max(0.0)).collect();
    let worst = atoms
        .iter()
        .map(|a| a.iter().zip(&x).map(|(f, v)| f * v).sum::<f64>())
        .fold(0.0f64, f64::max);
    let primal: f64 = target.iter().zip(&x).map(|(c, v)| c * v).sum();
    let lower = if worst > 0.0 { primal / worst.max(1.0) } else { primal };
    // Any feasible lambda is an upper bound; clamp tiny negatives from roundoff.
    let upper: f64 = sol.lambda.iter().map(|l| l.max(0.0)).sum();
    Ok((sol, lower, upper.max(lower)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(q("1/2"), BigRational::new(1.into(), 2.into()));
        assert_eq!(q("0.25"), BigRational::new(1.into(), 4.into()));
        assert_eq!(q("-3"), BigRational::from_integer((-3).into()));
        assert_eq!(q("2.5e-1"), BigRational::new(1.into(), 4.into()));
        assert_eq!(q("1e2"), BigRational::from_integer(100.into()));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn restriction_keeps_the_optimum() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(1..6);
            let mut atoms: Vec<Vec<BigRational>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            if i == j {
                                <BigRational as One>::one()
                            } else {
                                <BigRational as Zero>::zero()
                            }
                        })
                        .collect()
                })
                .collect();
            for _ in 0..rng.gen_range(0..8) {
                atoms.push(
                    (0..n)
                        .map(|_| BigRational::new(rng.gen_range(0..4).into(), 2.into()))
                        .collect(),
                );
            }
            let target: Vec<BigRational> = (0..n)
                .map(|_| BigRational::from_integer(rng.gen_range(0..3).into()))
                .collect();
            if target.iter().all(Zero::is_zero) {
                continue;
            }
            let full = solve_reduced(&atoms, &target).unwrap();
            let cut = solve_cover(&atoms, &target).unwrap();
            assert_eq!(full.value, cut.value);
            let cover: Vec<BigRational> = (0..n)
                .map(|i| {
                    atoms
                        .iter()
                        .zip(&cut.lambda)
                        .fold(<BigRational as Zero>::zero(), |acc, (a, l)| acc + &a[i] * l)
                })
                .collect();
            assert!(cover.iter().zip(&target).all(|(c, t)| c >= t));
            for a in &atoms {
                let v = a
                    .iter()
                    .zip(&cut.point)
                    .fold(<BigRational as Zero>::zero(), |acc, (f, x)| acc + f * x);
                assert!(v <= <BigRational as One>::one());
            }
        }
    }

    #[test]
    fn single_full_atom_covers_ones() {
        // Atoms e1, e2, (1,1); target (1,1): lambda = 1 on (1,1).
        let atoms = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let sol = solve_cover(&atoms, &[1.0, 1.0]).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-12);
        assert!((sol.lambda[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_mode_matches() {
        let atoms = vec![
            vec![q("1"), q("0"), q("0")],
            vec![q("0"), q("1"), q("0")],
            vec![q("0"), q("0"), q("1")],
            vec![q("0"), q("1/2"), q("1/2")],
        ];
        let sol = solve_cover(&atoms, &[q("0"), q("1"), q("1")]).unwrap();
        assert_eq!(sol.value, q("2"));
        // Dual point must attain the value.
        let attained: BigRational = sol.point[1].clone() + sol.point[2].clone();
        assert_eq!(attained, q("2"));
    }

    #[test]
    fn uncovered_coordinate_is_infeasible() {
        let atoms = vec![vec![1.0, 0.0]];
        assert!(matches!(solve_cover(&atoms, &[1.0, 1.0]), Err(Error::LpInfeasible(_))));
    }
}
