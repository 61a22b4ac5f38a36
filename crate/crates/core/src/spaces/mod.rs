//! Finite-dimensional normed spaces with a fixed basis.

pub mod descriptor;
pub mod dual;
pub mod family;
pub mod haar;
pub mod lp;
pub mod norming;
pub mod prescribed;
pub mod setfamily;
pub mod spec;
pub mod tsirelson;
pub mod vector;

pub use descriptor::{AtomSet, NormDescriptor};
pub use dual::{dual_norm_bracket, dual_norm_eval, dual_norm_exact, DualBracket, DualOracle};
pub use family::{DisjointFamily, Selection};
pub use norming::{norming_functional, NormingCertificate};
pub use prescribed::{build_prescribed_space, build_prescribed_space_partial, indicator_norm_exact};
pub use setfamily::SetFamily;
pub use spec::{Provenance, SpaceDocument, SpaceSpec};
pub use tsirelson::tsirelson_materialize;
pub use vector::{CoefVector, IndexSet};
