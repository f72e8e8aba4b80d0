use nalgebra::DMatrix;

use super::{TightenCase, TightenStep, TightenTrace, ACTIVE_TOL};
use crate::conesolver::SolverResult;
use crate::error::{Error, Result};
use crate::linalg::{self, SubspaceBasis, Vector, DEFAULT_RANK_TOL};
use crate::model::UqInstance;
use crate::reformulate::check_as3;

/// Recovers a global maximiser of a uniform QCQP from an optimum `(x*, t*)`
/// of its relaxation (variables laid out as `(x, t)`).
///
/// Works in coordinates `y = Q^{1/2}x` where the cone is `yᵀy ≤ t`. While a
/// gap remains, it moves `y` along a direction orthogonal to the active
/// constraint vectors: this keeps `t` and every active row fixed and does
/// not change the objective. Either the sphere `yᵀy = t*` is reached, or a
/// new independent constraint becomes active. When the active vectors span
/// everything (`p = n`), `y(t) = B⁻¹(δ − te)` and the root of
/// `y(t)ᵀy(t) = t` with the better objective is taken.
pub fn tighten_uq(inst: &UqInstance, res: &SolverResult, tol: f64) -> Result<(Vector, TightenTrace)> {
    if !res.is_optimal() {
        return Err(Error::Solver { status: res.status });
    }
    let n = inst.n();
    let p = inst.p();
    if res.x.len() != n + 1 {
        return Err(Error::InvalidInput(format!(
            "relaxation point has {} entries, expected n + 1 = {}",
            res.x.len(),
            n + 1
        )));
    }
    let as3 = check_as3(inst, DEFAULT_RANK_TOL);
    if !as3.holds {
        return Err(Error::ConditionNotMet(as3.reason));
    }
    let (norm, map) = inst.normalize_uq()?;
    let x_star = res.x.rows(0, n).into_owned();
    let t = res.x[n];
    let mut y = map.to_normalized(&x_star);
    let gap_of = |y: &Vector| t - y.norm_squared();
    let closed_tol = tol * (1.0 + t.abs());
    let mut trace = TightenTrace::new(gap_of(&y));
    if trace.initial_gap <= closed_tol {
        return Ok((x_star, trace));
    }

    // rows as (b_i, lo, hi) for the constraint t + 2b_iᵀy ∈ [lo, hi]
    let bs: Vec<Vector> = (1..=p).map(|i| norm.b(i).clone()).collect();
    let lo: Vec<f64> = (1..=p).map(|i| norm.bound(i).lower_or_neg_inf()).collect();
    let hi: Vec<f64> = (1..=p).map(|i| norm.bound(i).upper_or_inf()).collect();
    let row_tol: Vec<f64> = (0..p)
        .map(|k| ACTIVE_TOL * (1.0 + finite_abs(lo[k]) + finite_abs(hi[k])))
        .collect();

    for _ in 0..n + p {
        let value = |y: &Vector, k: usize| t + 2.0 * bs[k].dot(y);
        let active: Vec<usize> = (0..p)
            .filter(|&k| {
                let v = value(&y, k);
                v - lo[k] <= row_tol[k] || hi[k] - v <= row_tol[k]
            })
            .collect();
        trace.active_history.push(active.iter().map(|k| k + 1).collect());
        let active_bs: Vec<Vector> = active.iter().map(|&k| bs[k].clone()).collect();
        let comp = SubspaceBasis::complement_of(n, &active_bs, DEFAULT_RANK_TOL)?;
        let Some(d0) = comp.columns().first() else {
            let ys = closed_form(norm.b(0), &bs, &lo, &hi, &active, &y, t, &mut trace)?;
            return Ok((map.to_original(&ys), trace));
        };
        // orient so yᵀy grows along +d: the gap then shrinks monotonically
        let d = if y.dot(d0) < 0.0 { -d0 } else { d0.clone() };
        let (_, eps_root) = linalg::quadratic_roots(1.0, y.dot(&d), y.norm_squared() - t)
            .ok_or_else(|| failed("no real root along the direction", &trace))?;
        let mut eps_max = f64::INFINITY;
        let mut blocking = None;
        for k in 0..p {
            if active.contains(&k) {
                continue;
            }
            let rate = 2.0 * bs[k].dot(&d);
            if rate.abs() <= 1e-12 * bs[k].norm() {
                continue;
            }
            let v = value(&y, k);
            let limit = if rate > 0.0 { (hi[k] - v) / rate } else { (lo[k] - v) / rate };
            if limit < eps_max {
                eps_max = limit.max(0.0);
                blocking = Some(k);
            }
        }
        if eps_root <= eps_max {
            y += &d * eps_root;
            trace.steps.push(TightenStep {
                block: 0,
                direction: d,
                step: eps_root,
                activated: None,
                closed: true,
                gap: gap_of(&y),
            });
            trace.case = TightenCase::Direction;
            trace.final_gap = gap_of(&y);
            return Ok((map.to_original(&y), trace));
        }
        y += &d * eps_max;
        trace.steps.push(TightenStep {
            block: 0,
            direction: d,
            step: eps_max,
            activated: blocking.map(|k| k + 1),
            closed: false,
            gap: gap_of(&y),
        });
        trace.final_gap = gap_of(&y);
    }
    Err(failed("iteration cap reached", &trace))
}

fn finite_abs(v: f64) -> f64 {
    if v.is_finite() {
        v.abs()
    } else {
        0.0
    }
}

fn failed(reason: &str, trace: &TightenTrace) -> Error {
    Error::TightenFailed {
        reason: format!("{reason} after {} steps", trace.steps.len()),
        remaining_gap: trace.final_gap,
    }
}

#[allow(clippy::too_many_arguments)]
fn closed_form(
    b0: &Vector,
    bs: &[Vector],
    lo: &[f64],
    hi: &[f64],
    active: &[usize],
    y: &Vector,
    t: f64,
    trace: &mut TightenTrace,
) -> Result<Vector> {
    let n = y.len();
    if active.len() != n {
        return Err(failed(
            &format!("{} active rows span R^{n} but p = n is required", active.len()),
            trace,
        ));
    }
    let mut b = DMatrix::zeros(n, n);
    let mut delta = Vector::zeros(n);
    for (r, &k) in active.iter().enumerate() {
        b.set_row(r, &(&bs[k] * 2.0).transpose());
        let v = t + 2.0 * bs[k].dot(y);
        delta[r] = if (v - lo[k]).abs() <= (hi[k] - v).abs() { lo[k] } else { hi[k] };
    }
    let lu = b.lu();
    let v = lu
        .solve(&delta)
        .ok_or_else(|| failed("active matrix is singular", trace))?;
    let w = lu
        .solve(&Vector::from_element(n, 1.0))
        .ok_or_else(|| failed("active matrix is singular", trace))?;
    // y(s) = v − s·w, and g(s) = ‖y(s)‖² − s
    let (r1, r2) = linalg::quadratic_roots(w.norm_squared(), -(v.dot(&w) + 0.5), v.norm_squared())
        .ok_or_else(|| failed("g has no real roots", trace))?;
    let objective = |s: f64| s + 2.0 * b0.dot(&(&v - &w * s));
    let s = if objective(r1) >= objective(r2) { r1 } else { r2 };
    let ys = &v - &w * s;
    trace.case = TightenCase::ClosedForm;
    trace.steps.push(TightenStep {
        block: 0,
        direction: &ys - y,
        step: s - t,
        activated: None,
        closed: true,
        gap: s - ys.norm_squared(),
    });
    trace.final_gap = s - ys.norm_squared();
    Ok(ys)
}
