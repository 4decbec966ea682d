use crate::error::{Error, Result};

/// Numerical thresholds shared by the region and enumeration code.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Feasibility / optimality slack for LP-based tests.
    pub lp: f64,
    /// Chebyshev radius above which a region counts as full-dimensional.
    pub dim: f64,
    /// Pre-activations with `|v| <= bit` are treated as zero.
    pub bit: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { lp: 1e-8, dim: 1e-7, bit: crate::network::DEFAULT_BIT_TOLERANCE }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lp", self.lp), ("dim", self.dim), ("bit", self.bit)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}
