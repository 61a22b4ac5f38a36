//! JSON space descriptions: `{"variant": ..., payload}` with atoms given as
//! numbers or exact decimal/fraction strings.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::descriptor::{AtomSet, NormDescriptor};
use super::family::DisjointFamily;
use super::lp::{parse_rational, rational_from_f64};
use super::prescribed::{build_prescribed_space, build_prescribed_space_partial};
use super::setfamily::SetFamily;
use super::tsirelson::tsirelson_materialize;
use super::vector::IndexSet;
use crate::config::Caps;
use crate::error::{Error, Result};
use crate::fundfn::FundamentalFunction;

/// A coefficient written either as a JSON number or as a string such as
/// `"1/2"` or `"0.25"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Number(f64),
    Text(String),
}

impl Num {
    fn to_rational(&self) -> Result<BigRational> {
        match self {
            Num::Number(v) if v.is_finite() => Ok(rational_from_f64(*v)),
            Num::Number(v) => Err(Error::Parse(format!("non-finite coefficient {v}"))),
            Num::Text(s) => parse_rational(s),
        }
    }

    fn from_rational(r: &BigRational) -> Self {
        if r.is_integer() {
            Num::Text(r.numer().to_string())
        } else {
            Num::Text(format!("{}/{}", r.numer(), r.denom()))
        }
    }
}

/// `p` as a number or the string `"inf"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exponent {
    Number(f64),
    Text(String),
}

impl Exponent {
    fn value(&self) -> Result<f64> {
        match self {
            Exponent::Number(v) => Ok(*v),
            Exponent::Text(s) if matches!(s.as_str(), "inf" | "infinity" | "Infinity") => Ok(f64::INFINITY),
            Exponent::Text(s) => s.parse().map_err(|_| Error::Parse(format!("bad exponent {s:?}"))),
        }
    }

    fn from_value(p: f64) -> Self {
        if p.is_infinite() {
            Exponent::Text("inf".into())
        } else {
            Exponent::Number(p)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilySpec {
    /// `"all"`, `"schreier"` or `"initial_segments"`.
    Named(String),
    /// Explicit 1-based sets.
    Sets(Vec<IndexSet>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedSpec {
    pub weight: f64,
    pub space: SpaceSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum SpaceSpec {
    Lp {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
        p: Exponent,
    },
    Polyhedral {
        dim: usize,
        atoms: Vec<Vec<Num>>,
    },
    Tsirelson {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
    HaarLp {
        p: f64,
        level: u32,
    },
    UnconditionalHull {
        base: Box<SpaceSpec>,
    },
    MaxOf {
        parts: Vec<SpaceSpec>,
    },
    ScaledSum {
        parts: Vec<WeightedSpec>,
    },
    AugmentedPolyhedral {
        base: Box<SpaceSpec>,
        atoms: Vec<Vec<Num>>,
    },
    TopK {
        dim: usize,
        weights: Vec<f64>,
    },
    DisjointFamily(DisjointFamily),
    /// Built from a fundamental function and a set family.
    Prescribed {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
        phi: FundamentalFunction,
        family: FamilySpec,
        /// Accept families missing some sizes.
        #[serde(default)]
        partial: bool,
    },
}

fn atoms_from(rows: &[Vec<Num>], dim: usize) -> Result<AtomSet> {
    let mut exact = Vec::with_capacity(rows.len());
    for (j, r) in rows.iter().enumerate() {
        if r.len() != dim {
            return Err(Error::InvalidDescriptor(format!(
                "atom {} has {} entries, expected {dim}",
                j + 1,
                r.len()
            )));
        }
        exact.push(r.iter().map(Num::to_rational).collect::<Result<Vec<_>>>()?);
    }
    Ok(AtomSet::from_exact(exact))
}

fn atoms_to(atoms: &AtomSet) -> Vec<Vec<Num>> {
    atoms
        .exact_rows()
        .iter()
        .map(|r| r.iter().map(Num::from_rational).collect())
        .collect()
}

impl SpaceSpec {
    /// Sets the dimension of variants whose dimension is free.
    pub fn with_dim(mut self, n: usize) -> Self {
        match &mut self {
            SpaceSpec::Lp { dim, .. } | SpaceSpec::Tsirelson { dim } | SpaceSpec::Prescribed { dim, .. } => {
                *dim = Some(n)
            }
            SpaceSpec::UnconditionalHull { base } => {
                let b = std::mem::replace(base.as_mut(), SpaceSpec::MaxOf { parts: vec![] });
                **base = b.with_dim(n);
            }
            SpaceSpec::MaxOf { parts } => {
                for p in parts.iter_mut() {
                    let q = std::mem::replace(p, SpaceSpec::MaxOf { parts: vec![] });
                    *p = q.with_dim(n);
                }
            }
            SpaceSpec::ScaledSum { parts } => {
                for p in parts.iter_mut() {
                    let q = std::mem::replace(&mut p.space, SpaceSpec::MaxOf { parts: vec![] });
                    p.space = q.with_dim(n);
                }
            }
            _ => {}
        }
        self
    }

    pub fn build(&self, caps: &Caps) -> Result<NormDescriptor> {
        let missing = |what: &str| Error::InvalidDescriptor(format!("{what} needs a dimension"));
        let d = match self {
            SpaceSpec::Lp { dim, p } => NormDescriptor::Lp {
                dim: dim.ok_or_else(|| missing("lp"))?,
                p: p.value()?,
            },
            SpaceSpec::Polyhedral { dim, atoms } => NormDescriptor::Polyhedral {
                dim: *dim,
                atoms: atoms_from(atoms, *dim)?,
            },
            SpaceSpec::Tsirelson { dim } => tsirelson_materialize(dim.ok_or_else(|| missing("tsirelson"))?, caps)?,
            SpaceSpec::HaarLp { p, level } => NormDescriptor::HaarLp { p: *p, level: *level },
            SpaceSpec::UnconditionalHull { base } => NormDescriptor::UnconditionalHull {
                base: Box::new(base.build(caps)?),
            },
            SpaceSpec::MaxOf { parts } => NormDescriptor::MaxOf {
                parts: parts.iter().map(|p| p.build(caps)).collect::<Result<_>>()?,
            },
            SpaceSpec::ScaledSum { parts } => NormDescriptor::ScaledSum {
                parts: parts
                    .iter()
                    .map(|w| Ok((w.weight, w.space.build(caps)?)))
                    .collect::<Result<_>>()?,
            },
            SpaceSpec::AugmentedPolyhedral { base, atoms } => {
                let base = base.build(caps)?;
                let atoms = atoms_from(atoms, base.dim())?;
                NormDescriptor::AugmentedPolyhedral {
                    base: Box::new(base),
                    atoms,
                }
            }
            SpaceSpec::TopK { dim, weights } => NormDescriptor::TopK {
                dim: *dim,
                weights: weights.clone(),
            },
            SpaceSpec::DisjointFamily(f) => NormDescriptor::DisjointFamily(f.clone()),
            SpaceSpec::Prescribed {
                dim,
                phi,
                family,
                partial,
            } => {
                let n = dim.ok_or_else(|| missing("prescribed"))?;
                let fam = match family {
                    FamilySpec::Named(s) => match s.as_str() {
                        "all" => SetFamily::all_subsets(n),
                        "schreier" => SetFamily::schreier(n),
                        "initial_segments" => SetFamily::initial_segments(n),
                        other => return Err(Error::InvalidDescriptor(format!("unknown family {other:?}"))),
                    },
                    FamilySpec::Sets(sets) => SetFamily::new(n, sets.clone())?,
                };
                if *partial {
                    build_prescribed_space_partial(phi, &fam)?
                } else {
                    build_prescribed_space(phi, &fam)?
                }
            }
        };
        d.validate(caps)?;
        Ok(d)
    }

    pub fn from_descriptor(d: &NormDescriptor) -> Self {
        match d {
            NormDescriptor::Lp { dim, p } => SpaceSpec::Lp {
                dim: Some(*dim),
                p: Exponent::from_value(*p),
            },
            NormDescriptor::Polyhedral { dim, atoms } => SpaceSpec::Polyhedral {
                dim: *dim,
                atoms: atoms_to(atoms),
            },
            NormDescriptor::Tsirelson { dim, .. } => SpaceSpec::Tsirelson { dim: Some(*dim) },
            NormDescriptor::HaarLp { p, level } => SpaceSpec::HaarLp { p: *p, level: *level },
            NormDescriptor::UnconditionalHull { base } => SpaceSpec::UnconditionalHull {
                base: Box::new(Self::from_descriptor(base)),
            },
            NormDescriptor::MaxOf { parts } => SpaceSpec::MaxOf {
                parts: parts.iter().map(Self::from_descriptor).collect(),
            },
            NormDescriptor::ScaledSum { parts } => SpaceSpec::ScaledSum {
                parts: parts
                    .iter()
                    .map(|(w, p)| WeightedSpec {
                        weight: *w,
                        space: Self::from_descriptor(p),
                    })
                    .collect(),
            },
            NormDescriptor::AugmentedPolyhedral { base, atoms } => SpaceSpec::AugmentedPolyhedral {
                base: Box::new(Self::from_descriptor(base)),
                atoms: atoms_to(atoms),
            },
            NormDescriptor::TopK { dim, weights } => SpaceSpec::TopK {
                dim: *dim,
                weights: weights.clone(),
            },
            NormDescriptor::DisjointFamily(f) => SpaceSpec::DisjointFamily(f.clone()),
        }
    }

    /// SHA-256 of the compact JSON form, hex encoded.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).unwrap_or_default();
        hex::encode(Sha256::digest(bytes))
    }
}

/// Parameters and source of a renormed space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub construction: String,
    pub source_digest: String,
    pub params: serde_json::Value,
}

/// A space file: the description plus an optional provenance block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceDocument {
    #[serde(flatten)]
    pub space: SpaceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl SpaceDocument {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Float view of exact atoms, for reports.
pub fn rational_rows_to_f64(rows: &[Vec<BigRational>]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| r.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_exact_atoms() {
        let doc =
            SpaceDocument::parse(r#"{"variant":"polyhedral","dim":3,"atoms":[["0","1/2","0.5"],[1,1,1]]}"#).unwrap();
        let s = doc.space.build(&Caps::default()).unwrap();
        assert_eq!(s.value(&[0.0, 2.0, 2.0]), 4.0);
        let NormDescriptor::Polyhedral { atoms, .. } = &s else {
            unreachable!()
        };
        assert_eq!(atoms.exact.as_ref().unwrap()[0][1], parse_rational("1/2").unwrap());
    }

    #[test]
    fn lp_inf_and_dim_override() {
        let doc = SpaceDocument::parse(r#"{"variant":"lp","p":"inf"}"#).unwrap();
        assert!(doc.space.build(&Caps::default()).is_err());
        let s = doc.space.with_dim(3).build(&Caps::default()).unwrap();
        assert_eq!(s.value(&[1.0, -4.0, 2.0]), 4.0);
    }

    #[test]
    fn round_trip_is_stable() {
        let text = r#"{"variant":"max_of","parts":[{"variant":"tsirelson","dim":5},{"variant":"top_k","dim":5,"weights":[1,0.9,0.8,0.7,0.6]}]}"#;
        let caps = Caps::default();
        let doc = SpaceDocument::parse(text).unwrap();
        let s = doc.space.build(&caps).unwrap();
        let back = SpaceSpec::from_descriptor(&s);
        assert_eq!(back.build(&caps).unwrap(), s);
        assert_eq!(back.digest(), SpaceSpec::from_descriptor(&s).digest());
        assert_eq!(back.digest().len(), 64);
    }

    #[test]
    fn prescribed_schreier() {
        let text = r#"{"variant":"prescribed","dim":8,"partial":true,
            "phi":{"kind":"closed","formula":{"name":"power","exponent":1.0},"cap":8},
            "family":"schreier"}"#;
        let s = SpaceDocument::parse(text)
            .unwrap()
            .space
            .build(&Caps::default())
            .unwrap();
        assert_eq!(s.value(&[1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]), 2.0);
    }

    #[test]
    fn bad_documents_rejected() {
        assert!(SpaceDocument::parse(r#"{"variant":"nope"}"#).is_err());
        let doc = SpaceDocument::parse(r#"{"variant":"polyhedral","dim":2,"atoms":[["1/0", 1]]}"#);
        assert!(doc.is_err() || doc.unwrap().space.build(&Caps::default()).is_err());
    }
}
