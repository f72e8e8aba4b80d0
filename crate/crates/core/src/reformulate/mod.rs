//! Cone-program relaxations of uniform and structured QCQPs, and checks of the
//! conditions under which they are exact.
//!
//! Every builder returns a [`ConeProgram`] in minimisation form together with
//! a [`ReformulationMeta`] describing where `x` and each lifted `t_j` live.

mod corollaries;
mod lifted;
mod uq;

use serde::Serialize;

use crate::conesolver::RowSlot;
use crate::linalg::Vector;
use crate::model::Sense;

pub use crate::conesolver::ConeProgram;
pub use corollaries::{
    build_etrs, build_trs, build_ttrs, build_vtrs, build_wd, ttrs_instance, vtrs_instance, EtrsProblem, VtrsData,
    WdProgram, WdSolution,
};
pub use lifted::{build_cr, build_cr2, check_condition_c, check_condition_cc, lift_point};
pub use uq::{build_socp_indefinite, build_socp_uq, check_as3, split_indefinite, uq_as_qcqp};

/// A lifted variable `t_j ≥ xᵀQ_jx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LiftedVar {
    /// Block index `j` (0-based).
    pub block: usize,
    /// Program variable holding `t_j`.
    pub var: usize,
}

/// Variable layout and bookkeeping for a built relaxation.
///
/// Program variables are `x` (indices `0..n`) followed by one `t_j` per
/// entry of `lifted`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReformulationMeta {
    pub n: usize,
    /// Sense of the source problem; the program itself always minimises.
    pub sense: Sense,
    pub lifted: Vec<LiftedVar>,
    /// `J` (one-sided) or `K` (two-sided): blocks whose lifting is not a
    /// plain epigraph, 0-based.
    pub lifted_set: Vec<usize>,
    /// Constraint `i` (0-based) to program row.
    pub rows: Vec<RowSlot>,
    /// `λ_min` values used when splitting off an identity block.
    pub shifts: Vec<f64>,
    /// Program `x` is `x_original − translation`.
    pub translation: Option<Vector>,
}

impl ReformulationMeta {
    pub fn num_vars(&self) -> usize {
        self.n + self.lifted.len()
    }

    /// `x` part of a program point, in program coordinates.
    pub fn x_part(&self, z: &Vector) -> Vector {
        z.rows(0, self.n).into_owned()
    }

    /// `x` part of a program point, in original coordinates.
    pub fn back_map(&self, z: &Vector) -> Vector {
        let x = self.x_part(z);
        match &self.translation {
            Some(v) => x + v,
            None => x,
        }
    }

    /// Program variable index of `t_block`, if that block is lifted.
    pub fn t_var(&self, block: usize) -> Option<usize> {
        self.lifted.iter().find(|l| l.block == block).map(|l| l.var)
    }

    pub fn t_value(&self, z: &Vector, block: usize) -> Option<f64> {
        self.t_var(block).map(|k| z[k])
    }

    /// Program point from `x` (program coordinates) and `t` values listed in
    /// the order of `lifted`.
    pub fn layout(&self, x: &Vector, t: &[f64]) -> Vector {
        assert_eq!(x.len(), self.n);
        assert_eq!(t.len(), self.lifted.len());
        let mut z = Vector::zeros(self.num_vars());
        z.rows_mut(0, self.n).copy_from(x);
        for (l, &tv) in self.lifted.iter().zip(t) {
            z[l.var] = tv;
        }
        z
    }

    /// Converts a program objective value into the source problem's sense.
    pub fn original_value(&self, program_value: f64) -> f64 {
        self.sense.sign() * program_value
    }
}

/// Outcome of an exactness-condition check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub holds: bool,
    /// Rank or dimension the verdict is based on.
    pub rank: usize,
    /// The verdict holds iff `rank ≤ bound` (or an alternative clause holds).
    pub bound: usize,
    /// `(block, dimension)` for per-block checks.
    pub dims: Vec<(usize, usize)>,
    pub reason: String,
}

impl CertificateReport {
    fn trivial(reason: &str) -> Self {
        CertificateReport {
            holds: true,
            rank: 0,
            bound: 0,
            dims: Vec::new(),
            reason: reason.into(),
        }
    }
}
