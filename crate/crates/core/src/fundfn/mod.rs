//! Fundamental functions: representation, calculus and measurement on spaces.

pub mod calculus;
pub mod function;
pub mod measure;
pub mod regularize;

pub use calculus::{
    concave_envelope, delta_at, delta_profile, equivalence, is_concave_on_grid, make_alternating_fundfn, urp_check,
    weak_urp_constant, DeltaProfile,
};
pub use function::{Formula, FundamentalFunction};
pub use measure::{
    bidemocracy_constant, democracy_constant, dual_fundamental_exact, dual_fundamental_function, fundamental_function,
    DualFundamental, IndicatorNorms,
};
pub use regularize::{regularize_dilation, InterpolationStep, Regularized};
