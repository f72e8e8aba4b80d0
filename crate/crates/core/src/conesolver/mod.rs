//! Linear + second-order cone programs and the interior-point solver behind
//! every relaxation in the crate.

mod cones;
mod dual;
mod ipm;
mod kkt;
mod program;

pub use dual::{
    certify_strong_duality, dual_value, dual_value_tol, multipliers_from_result, row_map, uq_row_map,
    DualPoint, DualityReport, RowSlot, DUALITY_GAP_TOL,
};
pub use ipm::{solve, Certificate, SolverOptions, SolverResult, SolverStatus, UNBOUNDED_THRESHOLD};
pub use program::{ConeProgram, SocBlock, Violation};
