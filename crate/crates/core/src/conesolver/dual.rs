//! Closed-form Lagrangian dual of a uniform QCQP and the strong-duality check
//! against a solved relaxation.
//!
//! With `λ_i = λ_i⁺ − λ_i⁻`, `σ = 1 − Σλ_i`, `β = b₀ − Σλ_i b_i` and
//! `κ = d₀ − Σλ_i d_i + Σ(λ_i⁺u_i − λ_i⁻l_i)`, the dual function is
//!
//! ```text
//! d(λ) = sup_x L(x, λ) = −βᵀQ⁻¹β/σ + κ   if σ < 0
//!                      = κ                if σ = 0 and β = 0
//!                      = +∞               otherwise
//! ```

use serde::Serialize;

use super::ipm::{SolverResult, SolverStatus};
use crate::error::{Error, Result};
use crate::linalg::{self, Vector};
use crate::model::{Bound, UqInstance};

/// Signed multipliers, one per constraint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualPoint {
    pub lambda: Vec<f64>,
}

/// Where constraint `i` of a uniform QCQP lands in its relaxation program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RowSlot {
    Free,
    Equality(usize),
    Upper(usize),
    Lower(usize),
    Both { upper: usize, lower: usize },
}

/// Row placement used by the relaxation builders: equality rows are numbered
/// among equalities; otherwise an upper row (if finite) precedes a lower row.
pub fn row_map(bounds: &[Bound]) -> Vec<RowSlot> {
    let mut ineq = 0;
    let mut eq = 0;
    bounds
        .iter()
        .map(|bd| {
            if bd.is_equality() {
                eq += 1;
                return RowSlot::Equality(eq - 1);
            }
            let up = bd.upper.map(|_| {
                ineq += 1;
                ineq - 1
            });
            let lo = bd.lower.map(|_| {
                ineq += 1;
                ineq - 1
            });
            match (up, lo) {
                (None, None) => RowSlot::Free,
                (Some(u), None) => RowSlot::Upper(u),
                (None, Some(l)) => RowSlot::Lower(l),
                (Some(upper), Some(lower)) => RowSlot::Both { upper, lower },
            }
        })
        .collect()
}

/// [`row_map`] applied to the constraints of a uniform QCQP.
pub fn uq_row_map(inst: &UqInstance) -> Vec<RowSlot> {
    row_map(inst.bounds())
}

/// Signed multipliers recovered from relaxation duals.
pub fn multipliers_from_result(inst: &UqInstance, res: &SolverResult) -> DualPoint {
    let z = &res.ineq_duals;
    let y = &res.eq_duals;
    let lambda = uq_row_map(inst)
        .into_iter()
        .map(|slot| match slot {
            RowSlot::Free => 0.0,
            RowSlot::Equality(k) => y[k],
            RowSlot::Upper(k) => z[k],
            RowSlot::Lower(k) => -z[k],
            RowSlot::Both { upper, lower } => z[upper] - z[lower],
        })
        .collect();
    DualPoint { lambda }
}

struct DualParts {
    sigma: f64,
    beta: Vector,
    kappa: f64,
}

fn dual_parts(inst: &UqInstance, lam: &DualPoint) -> Result<DualParts> {
    if lam.lambda.len() != inst.p() {
        return Err(Error::InvalidInput(format!(
            "{} multipliers for {} constraints",
            lam.lambda.len(),
            inst.p()
        )));
    }
    let mut sigma = 1.0;
    let mut beta = inst.b(0).clone();
    let mut kappa = inst.d(0);
    for (k, &l) in lam.lambda.iter().enumerate() {
        let i = k + 1;
        if !l.is_finite() {
            return Err(Error::InvalidMultiplier {
                index: i,
                reason: "not finite".into(),
            });
        }
        if l == 0.0 {
            continue;
        }
        sigma -= l;
        beta -= inst.b(i) * l;
        kappa -= l * inst.d(i);
        let bd = inst.bound(i);
        if l > 0.0 {
            let u = bd.upper.ok_or_else(|| Error::InvalidMultiplier {
                index: i,
                reason: "positive multiplier on a constraint with u = +∞".into(),
            })?;
            kappa += l * u;
        } else {
            let lo = bd.lower.ok_or_else(|| Error::InvalidMultiplier {
                index: i,
                reason: "negative multiplier on a constraint with l = −∞".into(),
            })?;
            kappa += l * lo;
        }
    }
    Ok(DualParts { sigma, beta, kappa })
}

/// Exact closed-form `d(λ)`; may return `+∞`. Requires `Q ≻ 0`.
pub fn dual_value(inst: &UqInstance, lam: &DualPoint) -> Result<f64> {
    let parts = dual_parts(inst, lam)?;
    if parts.sigma < 0.0 {
        let qb = linalg::spd_solve(inst.q(), &parts.beta)?;
        Ok(-parts.beta.dot(&qb) / parts.sigma + parts.kappa)
    } else if parts.sigma == 0.0 && parts.beta.iter().all(|&v| v == 0.0) {
        Ok(parts.kappa)
    } else {
        Ok(f64::INFINITY)
    }
}

/// `d(λ)` with `σ` and `β` snapped to zero when they are within the given
/// tolerances, as needed for multipliers returned by an interior-point method.
pub fn dual_value_tol(inst: &UqInstance, lam: &DualPoint, sigma_tol: f64, beta_tol: f64) -> Result<f64> {
    let parts = dual_parts(inst, lam)?;
    if parts.sigma < -sigma_tol {
        let qb = linalg::spd_solve(inst.q(), &parts.beta)?;
        Ok(-parts.beta.dot(&qb) / parts.sigma + parts.kappa)
    } else if parts.sigma <= sigma_tol && parts.beta.norm() <= beta_tol {
        Ok(parts.kappa)
    } else {
        Ok(f64::INFINITY)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityReport {
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub holds: bool,
    pub multipliers: DualPoint,
}

/// Relative tolerance for the duality-gap verdict.
pub const DUALITY_GAP_TOL: f64 = 1e-5;

/// Evaluates `d(λ)` at the multipliers of a solved relaxation of `inst` (as
/// produced by the uniform-QCQP relaxation builder) and compares it with the
/// relaxation value `−res.objective`.
pub fn certify_strong_duality(inst: &UqInstance, res: &SolverResult) -> Result<DualityReport> {
    if res.status != SolverStatus::Optimal {
        return Err(Error::Solver { status: res.status });
    }
    let primal_value = -res.objective;
    let multipliers = multipliers_from_result(inst, res);
    let bscale = inst.bs().iter().map(|b| b.norm()).fold(1.0, f64::max);
    let dual = dual_value_tol(inst, &multipliers, 1e-7, 1e-6 * bscale)?;
    let gap = dual - primal_value;
    let holds = gap.is_finite() && gap.abs() <= DUALITY_GAP_TOL * (1.0 + primal_value.abs());
    Ok(DualityReport {
        primal_value,
        dual_value: dual,
        gap,
        holds,
        multipliers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymMatrix;

    fn unit_interval() -> UqInstance {
        // max x² s.t. x² ≤ 1
        UqInstance::new(
            SymMatrix::identity(1),
            vec![Vector::zeros(1), Vector::zeros(1)],
            vec![0.0, 0.0],
            vec![Bound::upper(1.0)],
        )
        .unwrap()
    }

    #[test]
    fn zero_multiplier_is_unbounded() {
        let inst = unit_interval();
        let d = dual_value(&inst, &DualPoint { lambda: vec![0.0] }).unwrap();
        assert_eq!(d, f64::INFINITY);
    }

    #[test]
    fn grid_infimum_matches_primal() {
        // oracle: minimise d over a 1-D grid of λ ≥ 0
        let inst = unit_interval();
        let mut best = f64::INFINITY;
        for k in 0..=4000 {
            let l = k as f64 * 1e-3;
            best = best.min(dual_value(&inst, &DualPoint { lambda: vec![l] }).unwrap());
        }
        assert!((best - 1.0).abs() < 1e-9);
        let eps = 1e-3;
        let d = dual_value(&inst, &DualPoint { lambda: vec![1.0 + eps] }).unwrap();
        assert!((d - (1.0 + eps)).abs() < 1e-12);
    }

    #[test]
    fn multiplier_on_infinite_side_rejected() {
        let inst = unit_interval();
        let r = dual_value(&inst, &DualPoint { lambda: vec![-1.0] });
        assert!(matches!(r, Err(Error::InvalidMultiplier { index: 1, .. })));
    }

    #[test]
    fn row_map_order() {
        let inst = UqInstance::new(
            SymMatrix::identity(1),
            vec![Vector::zeros(1); 5],
            vec![0.0; 5],
            vec![
                Bound::range(0.0, 1.0),
                Bound::equal(2.0),
                Bound::upper(1.0),
                Bound::lower(-1.0),
            ],
        )
        .unwrap();
        assert_eq!(
            uq_row_map(&inst),
            vec![
                RowSlot::Both { upper: 0, lower: 1 },
                RowSlot::Equality(0),
                RowSlot::Upper(2),
                RowSlot::Lower(3)
            ]
        );
    }
}
