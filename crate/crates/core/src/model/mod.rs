//! Problem instances: uniform QCQPs, structured QCQPs, ball intersections and
//! the binary ILP reduction.
//!
//! Quadratic functions follow the convention `xᵀQx + 2bᵀx + d`; the stored
//! linear coefficient is `b`, not `2b`.

mod balls;
mod ilp;
mod qcqp;
mod uq;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use balls::BallIntersection;
pub use ilp::{enumerate_binary_ilp, ilp_to_uq};
pub use qcqp::QcqpInstance;
pub use uq::{find_interior_point, InteriorPoint, NormalizeMap, UqInstance};

/// Default absolute feasibility tolerance on constraint values.
pub const DEFAULT_FEAS_TOL: f64 = 1e-6;

/// Two-sided bound `lower ≤ · ≤ upper`; `None` encodes an infinite side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl Bound {
    pub fn new(lower: Option<f64>, upper: Option<f64>) -> Result<Self> {
        let b = Bound { lower, upper };
        b.validate()?;
        Ok(b)
    }

    pub fn free() -> Self {
        Bound {
            lower: None,
            upper: None,
        }
    }

    pub fn upper(u: f64) -> Self {
        Bound {
            lower: None,
            upper: Some(u),
        }
    }

    pub fn lower(l: f64) -> Self {
        Bound {
            lower: Some(l),
            upper: None,
        }
    }

    pub fn range(l: f64, u: f64) -> Self {
        Bound {
            lower: Some(l),
            upper: Some(u),
        }
    }

    pub fn equal(v: f64) -> Self {
        Self::range(v, v)
    }

    pub fn is_equality(&self) -> bool {
        matches!((self.lower, self.upper), (Some(l), Some(u)) if l == u)
    }

    pub fn lower_or_neg_inf(&self) -> f64 {
        self.lower.unwrap_or(f64::NEG_INFINITY)
    }

    pub fn upper_or_inf(&self) -> f64 {
        self.upper.unwrap_or(f64::INFINITY)
    }

    /// Amount by which `v` falls outside the bound (0 inside).
    pub fn violation(&self, v: f64) -> f64 {
        let lo = self.lower.map_or(0.0, |l| l - v);
        let hi = self.upper.map_or(0.0, |u| v - u);
        lo.max(hi).max(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        for v in [self.lower, self.upper].into_iter().flatten() {
            if !v.is_finite() {
                return Err(Error::InvalidBounds(format!(
                    "finite bound expected, got {v}"
                )));
            }
        }
        if let (Some(l), Some(u)) = (self.lower, self.upper) {
            if l > u {
                return Err(Error::InvalidBounds(format!("lower {l} exceeds upper {u}")));
            }
        }
        Ok(())
    }

    /// The bound shifted by `−s` on both sides.
    pub fn shifted(&self, s: f64) -> Self {
        Bound {
            lower: self.lower.map(|l| l - s),
            upper: self.upper.map(|u| u - s),
        }
    }
}

/// Optimisation direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

impl Sense {
    /// `+1` for min, `−1` for max: multiplies a max objective into min form.
    pub fn sign(self) -> f64 {
        match self {
            Sense::Min => 1.0,
            Sense::Max => -1.0,
        }
    }
}
