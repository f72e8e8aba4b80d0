use super::{TightenCase, TightenStep, TightenTrace};
use crate::conesolver::SolverResult;
use crate::error::{Error, Result};
use crate::linalg::{self, SubspaceBasis, Vector, DEFAULT_RANK_TOL};
use crate::model::QcqpInstance;
use crate::reformulate::{check_condition_c, check_condition_cc, ReformulationMeta};

/// Recovers an optimal point of a structured QCQP from an optimum of the
/// relaxation built by `build_cr` or `build_cr2`.
///
/// For every block `j₀` in the lifted set whose gap `t_{j₀} − xᵀQ_{j₀}x` is
/// still open, it moves along a direction `x₀` orthogonal to all `b_i`
/// (`i ≥ 1`), inside the range of `Q_{j₀}` and the null spaces of every other
/// block. Such a move changes only `xᵀQ_{j₀}x`, so one root of a scalar
/// quadratic closes that gap without touching the others.
///
/// The returned point is in the instance's coordinates (program coordinates
/// before `meta.translation` is added back).
pub fn tighten_qcqp(
    inst: &QcqpInstance,
    res: &SolverResult,
    meta: &ReformulationMeta,
    tol: f64,
) -> Result<(Vector, TightenTrace)> {
    if !res.is_optimal() {
        return Err(Error::Solver { status: res.status });
    }
    let n = inst.n();
    if meta.n != n || res.x.len() != meta.num_vars() {
        return Err(Error::InvalidInput(format!(
            "relaxation point of length {} does not match the layout ({} variables, n = {})",
            res.x.len(),
            meta.num_vars(),
            meta.n
        )));
    }
    let mut x = meta.x_part(&res.x);
    let gap = |x: &Vector, j: usize, t: f64| t - inst.block(j).quad_form(x);
    let open: Vec<(usize, f64)> = meta
        .lifted_set
        .iter()
        .filter_map(|&j| meta.t_value(&res.x, j).map(|t| (j, t)))
        .filter(|&(j, t)| gap(&x, j, t) > tol * (1.0 + t.abs()))
        .collect();
    let mut trace = TightenTrace::new(open.iter().map(|&(j, t)| gap(&x, j, t)).fold(0.0, f64::max));
    if open.is_empty() {
        return Ok((x, trace));
    }
    let report = if inst.is_one_sided() {
        check_condition_c(inst, &meta.lifted_set, DEFAULT_RANK_TOL)?
    } else {
        check_condition_cc(inst, &meta.lifted_set, DEFAULT_RANK_TOL)?
    };
    if !report.holds {
        return Err(Error::ConditionNotMet(report.reason));
    }

    let constraint_bs = &inst.bs()[1..];
    for &(j0, t) in &open {
        let mut orth: Vec<Vector> = constraint_bs.to_vec();
        orth.extend(linalg::null_basis(inst.block(j0), DEFAULT_RANK_TOL)?.columns().iter().cloned());
        for (i, q) in inst.blocks().iter().enumerate() {
            if i != j0 {
                orth.extend(linalg::range_basis(q, DEFAULT_RANK_TOL)?.columns().iter().cloned());
            }
        }
        let comp = SubspaceBasis::complement_of(n, &orth, DEFAULT_RANK_TOL)?;
        let Some(x0) = comp.columns().first().cloned() else {
            return Err(Error::TightenFailed {
                reason: format!("no admissible direction for block {j0}"),
                remaining_gap: gap(&x, j0, t),
            });
        };
        let q = inst.block(j0);
        let Some((a1, a2)) = linalg::quadratic_roots(q.quad_form(&x0), q.bilinear(&x, &x0), q.quad_form(&x) - t) else {
            return Err(Error::TightenFailed {
                reason: format!("block {j0}: no real step closes the gap"),
                remaining_gap: gap(&x, j0, t),
            });
        };
        let alpha = if a1.abs() <= a2.abs() { a1 } else { a2 };
        x += &x0 * alpha;
        trace.active_history.push(Vec::new());
        trace.steps.push(TightenStep {
            block: j0,
            direction: x0,
            step: alpha,
            activated: None,
            closed: true,
            gap: gap(&x, j0, t),
        });
    }
    trace.case = TightenCase::Direction;
    trace.final_gap = open.iter().map(|&(j, t)| gap(&x, j, t).abs()).fold(0.0, f64::max);
    Ok((x, trace))
}
