//! Second-order cone relaxations of uniform and structured nonconvex QCQPs.
//!
//! A uniform QCQP shares one Hessian across objective and constraints:
//!
//! ```text
//! max  f₀(x)   s.t.  l_i ≤ f_i(x) ≤ u_i,   f_i(x) = xᵀQx + 2b_iᵀx + d_i
//! ```
//!
//! Lifting `xᵀQx` to a scalar `t` with the cone `xᵀQx ≤ t` gives an SOCP whose
//! value bounds the original from above. This crate builds those relaxations,
//! checks the rank conditions under which they are exact, extracts exact
//! solutions when they are, and otherwise rounds to a feasible point with a
//! guaranteed approximation ratio. The same machinery computes Chebyshev
//! centers of ball intersections.
//!
//! Everything runs on a self-contained dense interior-point solver for
//! linear + second-order cone programs ([`conesolver`]).

pub mod chebyshev;
pub mod cli;
pub mod conesolver;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod recover;
pub mod reformulate;

pub use error::{Error, Result};
pub use linalg::{SubspaceBasis, SymMatrix, Vector};
pub use model::{BallIntersection, Bound, QcqpInstance, Sense, UqInstance};
