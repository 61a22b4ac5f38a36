//! Norming functionals: `f` with `|f|* <= 1` and `<x, f> = N(x)`.

use serde::{Deserialize, Serialize};

use super::descriptor::{hull_best, top_k_best, NormDescriptor};
use super::haar;
use super::vector::{sorted_moduli, CoefVector, IndexSet};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormingCertificate {
    pub functional: CoefVector,
    pub attained_value: f64,
}

pub fn norming_functional(space: &NormDescriptor, x: &CoefVector) -> Result<NormingCertificate> {
    x.check_dim(space.dim())?;
    if x.is_zero() {
        return Err(Error::Precondition("norming functional of the zero vector".into()));
    }
    let f = functional(space, x.as_slice());
    let attained_value = space.value(x.as_slice());
    Ok(NormingCertificate {
        functional: CoefVector::new(f)?,
        attained_value,
    })
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Atom restricted to `supp x` and twisted by the signs of `x`.
fn twisted(atom: &[f64], x: &[f64]) -> Vec<f64> {
    atom.iter().zip(x).map(|(a, v)| a * sign(*v)).collect()
}

fn sup_functional(x: &[f64]) -> Vec<f64> {
    let i = sorted_moduli(x)
        .first()
        .and_then(|m| x.iter().position(|v| v.abs() == *m))
        .unwrap_or(0);
    let mut f = vec![0.0; x.len()];
    f[i] = sign(x[i]);
    f
}

fn functional(space: &NormDescriptor, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let absx: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    match space {
        NormDescriptor::Lp { p, .. } => {
            let norm = space.value(x);
            if p.is_infinite() {
                sup_functional(x)
            } else if *p == 1.0 {
                x.iter().map(|v| sign(*v)).collect()
            } else {
                x.iter().map(|v| sign(*v) * (v.abs() / norm).powf(p - 1.0)).collect()
            }
        }
        NormDescriptor::Polyhedral { atoms, .. } | NormDescriptor::Tsirelson { atoms, .. } => {
            let sup = absx.iter().fold(0.0f64, |m, v| m.max(*v));
            match atoms.best(&absx) {
                (v, Some(j)) if v > sup => twisted(&atoms.rows[j], x),
                _ => sup_functional(x),
            }
        }
        NormDescriptor::HaarLp { p, level } => haar::holder_functional(*level, &haar::synthesize(*level, x, *p), *p),
        NormDescriptor::UnconditionalHull { base } => {
            let (_, signs) = hull_best(base, x);
            let y: Vec<f64> = x.iter().zip(&signs).map(|(a, s)| a * s).collect();
            functional(base, &y).iter().zip(&signs).map(|(f, s)| f * s).collect()
        }
        NormDescriptor::MaxOf { parts } => {
            let mut best = (f64::NEG_INFINITY, 0);
            for (j, p) in parts.iter().enumerate() {
                let v = p.value(x);
                if v > best.0 {
                    best = (v, j);
                }
            }
            functional(&parts[best.1], x)
        }
        NormDescriptor::ScaledSum { parts } => {
            let mut f = vec![0.0; n];
            for (w, p) in parts.iter().filter(|(w, _)| *w > 0.0) {
                if p.value(x) > 0.0 {
                    for (a, b) in f.iter_mut().zip(functional(p, x)) {
                        *a += w * b;
                    }
                }
            }
            f
        }
        NormDescriptor::AugmentedPolyhedral { base, atoms } => match atoms.best(&absx) {
            (v, Some(j)) if v > base.value(x) => twisted(&atoms.rows[j], x),
            _ => functional(base, x),
        },
        NormDescriptor::TopK { weights, .. } => {
            let (_, k) = top_k_best(weights, x);
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| absx[b].total_cmp(&absx[a]).then(a.cmp(&b)));
            let mut f = vec![0.0; n];
            for &i in order.iter().take(k) {
                f[i] = weights[k - 1] * sign(x[i]);
            }
            f
        }
        NormDescriptor::DisjointFamily(fam) => {
            let sel = fam.best(x);
            let mut f = vec![0.0; n];
            for a in &sel.sets {
                let w = fam.weight(a.len());
                for i in IndexSet::iter(*a) {
                    f[i] = w * sign(x[i]);
                }
            }
            f
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::dual::dual_norm_bracket;
    use crate::spaces::vector::dot;

    fn cv(v: &[f64]) -> CoefVector {
        CoefVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn euclidean_holder() {
        let c = norming_functional(&NormDescriptor::lp(2, 2.0), &cv(&[3.0, 4.0])).unwrap();
        assert!((c.functional[0] - 0.6).abs() < 1e-15);
        assert!((c.functional[1] - 0.8).abs() < 1e-15);
        assert_eq!(c.attained_value, 5.0);
    }

    #[test]
    fn polyhedral_achieving_atom() {
        let s = NormDescriptor::polyhedral(3, vec![vec![1.0, 1.0, 1.0]]);
        let c = norming_functional(&s, &cv(&[1.0, 1.0, 1.0])).unwrap();
        assert_eq!(c.functional.as_slice(), &[1.0, 1.0, 1.0]);
        assert_eq!(c.attained_value, 3.0);
    }

    #[test]
    fn zero_vector_rejected() {
        assert!(norming_functional(&NormDescriptor::lp(2, 2.0), &cv(&[0.0, 0.0])).is_err());
    }

    #[test]
    fn certificates_attain_and_are_feasible() {
        let top = NormDescriptor::TopK {
            dim: 3,
            weights: vec![1.0, 0.9, 0.7],
        };
        let spaces = [
            NormDescriptor::lp(3, 1.5),
            NormDescriptor::lp(3, f64::INFINITY),
            NormDescriptor::MaxOf {
                parts: vec![NormDescriptor::lp(3, 2.0), top.clone()],
            },
            NormDescriptor::ScaledSum {
                parts: vec![(0.5, NormDescriptor::lp(3, 3.0)), (2.0, top)],
            },
        ];
        let x = cv(&[0.4, -1.3, 0.0]);
        for s in &spaces {
            let c = norming_functional(s, &x).unwrap();
            let pairing = c.functional.dot(&x);
            assert!((pairing - s.value(x.as_slice())).abs() < 1e-12, "{s:?}");
            let b = dual_norm_bracket(s, &c.functional).unwrap();
            assert!(b.lower <= 1.0 + 1e-9, "{s:?}");
            for t in 0..200 {
                let y: Vec<f64> = (0..3).map(|i| ((t * 7 + i * 13) % 17) as f64 / 8.0 - 1.0).collect();
                assert!(dot(&y, c.functional.as_slice()) <= s.value(&y) + 1e-12);
            }
            assert_eq!(c.functional[2], 0.0);
        }
    }
}
