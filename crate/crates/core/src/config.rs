use serde::{Deserialize, Serialize};

/// Comparison tolerance used when an inequality is checked in `f64`.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Size limits for the exponential-cost routines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Caps {
    /// Largest dimension for subset enumeration (fundamental functions,
    /// democracy constants, `sigma_m`).
    pub enumeration: usize,
    /// Largest dimension for the disjoint-family bitmask routines.
    pub dp: usize,
    /// Largest dimension for exhaustive sign enumeration.
    pub sign_hull: usize,
    /// Largest dimension for Tsirelson atom saturation.
    pub tsirelson: usize,
    pub tolerance: f64,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            enumeration: 20,
            dp: 12,
            sign_hull: 16,
            tsirelson: 12,
            tolerance: DEFAULT_TOL,
        }
    }
}
