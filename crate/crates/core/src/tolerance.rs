//! Numerical tolerances shared by every routine in the crate.

use serde::{Deserialize, Serialize};

/// Orthogonality residual `max |R^T R - I|` accepted for rotations.
pub const TAU_ORTH: f64 = 1e-9;
/// Generic numeric comparison tolerance.
pub const TAU_NUM: f64 = 1e-9;
/// Target width of the bisection bracket for similarity dimensions.
pub const TAU_DIM: f64 = 1e-10;
/// Relative rank threshold, multiplied by the largest singular value.
pub const TAU_RANK_REL: f64 = 1e-8;
/// Target width of the Collatz-Wielandt bracket in the spectral radius.
pub const TAU_EIG: f64 = 1e-12;
/// Separation slack for ball certificates, relative to the diameter.
pub const TAU_SEP_REL: f64 = 1e-12;
/// Convergent test tolerance in `angle_order`.
pub const TAU_ANGLE: f64 = 1e-9;
/// Entry-wise distance under which two group elements are identified.
pub const GROUP_DEDUP: f64 = 1e-6;

pub const BISECTION_MAX_ITER: usize = 200;
pub const POWER_ITER_MAX_SWEEPS: usize = 100_000;
pub const CLOSURE_CAP: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub num: f64,
    pub orth: f64,
    pub dim: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        num: TAU_NUM,
        orth: TAU_ORTH,
        dim: TAU_DIM,
    };
    pub const STRICT: Tolerances = Tolerances {
        num: 1e-12,
        orth: 1e-12,
        dim: 1e-12,
    };

    /// Looks up a named profile (`default` or `strict`).
    pub fn profile(name: &str) -> Option<Tolerances> {
        match name {
            "default" => Some(Self::DEFAULT),
            "strict" => Some(Self::STRICT),
            _ => None,
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
