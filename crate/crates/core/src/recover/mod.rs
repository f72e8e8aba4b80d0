//! Turning relaxation optima into points of the original problem: exact
//! recovery when the relaxation is tight, and a scaled rounding with a ratio
//! guarantee when it is not.

mod approx;
mod lifted;
mod uq;

use serde::Serialize;

use crate::linalg::Vector;

pub use approx::{approx_uq, approx_uq_with, gamma_uq, guaranteed_ratio, tau_bar, ApproxCertificate, ApproxTrace};
pub use lifted::tighten_qcqp;
pub use uq::tighten_uq;

/// Relative slack below which a constraint counts as active.
pub const ACTIVE_TOL: f64 = 1e-7;

/// Default tolerance for declaring a cone gap `t − xᵀQx` closed, relative to
/// `1 + |t|`.
pub const GAP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightenStep {
    /// Block whose gap is being closed (`0` for uniform instances).
    pub block: usize,
    pub direction: Vector,
    pub step: f64,
    /// Constraint (1-based) that became active, if the step stopped at one.
    pub activated: Option<usize>,
    /// Whether this step closed the gap.
    pub closed: bool,
    /// Gap after the step.
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TightenCase {
    /// The relaxation point already had a closed gap.
    AlreadyTight,
    /// Closed by moving along directions orthogonal to the active rows.
    Direction,
    /// Closed by the one-dimensional reduction over a nonsingular active set.
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightenTrace {
    pub case: TightenCase,
    pub steps: Vec<TightenStep>,
    pub initial_gap: f64,
    pub final_gap: f64,
    /// Active constraints (1-based) seen at each step.
    pub active_history: Vec<Vec<usize>>,
}

impl TightenTrace {
    fn new(initial_gap: f64) -> Self {
        TightenTrace {
            case: TightenCase::AlreadyTight,
            steps: Vec::new(),
            initial_gap,
            final_gap: initial_gap,
            active_history: Vec::new(),
        }
    }
}
