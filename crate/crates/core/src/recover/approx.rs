use serde::Serialize;

use crate::conesolver::{self, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{self, Vector};
use crate::model::UqInstance;
use crate::reformulate::build_socp_uq;

/// Intermediate quantities of the rounding, kept for inspection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxTrace {
    /// The relaxation point was already feasible with a closed gap.
    pub shortcut: bool,
    pub y: Vector,
    pub alpha: f64,
    pub s1: Vector,
    pub s2: Vector,
    pub t1: f64,
    pub t2: f64,
    /// Chosen index, 1 or 2.
    pub j_bar: usize,
    pub x_bar: Vector,
    pub tau_bar: f64,
    pub gamma: f64,
    pub guaranteed_ratio: f64,
    /// Whether the chosen index passed the `≤ 2` selection test.
    pub selection_ok: bool,
    /// `|s₁ᵀQs₁ + s₂ᵀQs₂ − t*|`
    pub energy_residual: f64,
    /// `|(s₁ᵀQs₁ + 2t₁b₀ᵀs₁) + (s₂ᵀQs₂ + 2t₂b₀ᵀs₂) − v|`
    pub identity_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxCertificate {
    /// `f₀` at the returned point.
    pub lower: f64,
    /// Relaxation value.
    pub upper: f64,
    pub gamma: f64,
    pub guaranteed_ratio: f64,
    /// `lower ≥ guaranteed_ratio · upper − tol`
    pub ratio_holds: bool,
}

/// `((1 − γ)/(√2 + γ))²`
pub fn guaranteed_ratio(gamma: f64) -> f64 {
    ((1.0 - gamma) / (std::f64::consts::SQRT_2 + gamma)).powi(2)
}

fn inv_energies(inst: &UqInstance) -> Result<Vec<f64>> {
    (1..=inst.p())
        .map(|i| {
            let w = linalg::spd_solve(inst.q(), inst.b(i))?;
            Ok(inst.b(i).dot(&w))
        })
        .collect()
}

/// `max_i ‖Q^{−1/2}b_i‖ / √(u_i − d_i + ‖Q^{−1/2}b_i‖²)` over rows with a
/// finite upper bound.
pub fn gamma_uq(inst: &UqInstance) -> Result<f64> {
    let beta = inv_energies(inst)?;
    let mut gamma: f64 = 0.0;
    for i in 1..=inst.p() {
        let Some(u) = inst.bound(i).upper else { continue };
        let radicand = u - inst.d(i) + beta[i - 1];
        if radicand <= 0.0 {
            return Err(Error::InvalidInstance(format!(
                "row {i}: u − d + bᵀQ⁻¹b = {radicand:e} is not positive"
            )));
        }
        gamma = gamma.max(beta[i - 1].sqrt() / radicand.sqrt());
    }
    Ok(gamma)
}

/// Largest `τ ∈ [0, 1]` with `f_i(τx̄) ≤ u_i` for every row.
pub fn tau_bar(inst: &UqInstance, x_bar: &Vector) -> Result<f64> {
    let a = inst.q().quad_form(x_bar);
    let mut tau: f64 = 1.0;
    for i in 1..=inst.p() {
        let Some(u) = inst.bound(i).upper else { continue };
        let c = inst.d(i) - u;
        if c > 0.0 {
            return Err(Error::PreconditionViolated(format!(
                "origin violates row {i} (d − u = {c:e})"
            )));
        }
        let b = inst.b(i).dot(x_bar);
        let f1 = a + 2.0 * b + c;
        if f1 <= 0.0 {
            continue;
        }
        // f(0) ≤ 0 < f(1): the larger root lies in [0, 1)
        let root = match linalg::quadratic_roots(a, b, c) {
            Some((_, r)) => r,
            None => 0.0,
        };
        tau = tau.min(root.clamp(0.0, 1.0));
    }
    Ok(tau)
}

fn check_shape(inst: &UqInstance) -> Result<()> {
    for i in 1..=inst.p() {
        let bd = inst.bound(i);
        if bd.lower.is_some() || bd.upper.is_none() {
            return Err(Error::WrongShape(format!(
                "row {i} must be an upper bound only (got {bd:?})"
            )));
        }
    }
    if inst.d(0) != 0.0 {
        return Err(Error::PreconditionViolated(format!("objective offset d₀ = {} is not zero", inst.d(0))));
    }
    for i in 1..=inst.p() {
        let u = inst.bound(i).upper_or_inf();
        if inst.d(i) >= u {
            return Err(Error::PreconditionViolated(format!(
                "origin is not strictly interior to row {i} (d = {}, u = {u})",
                inst.d(i)
            )));
        }
    }
    linalg::pd_inv_sqrt(inst.q(), 1e-12)?;
    Ok(())
}

/// Feasible point with a guaranteed fraction of the relaxation value for a
/// convex uniform QCQP whose rows are upper bounds only and whose origin is
/// strictly interior.
///
/// Solves the relaxation, splits its optimum `(x*, t*)` into two unit-weight
/// pieces that each attain the relaxation value, picks the piece whose
/// normalised point stays within a factor 2 of every row, and scales it back
/// into the feasible set.
pub fn approx_uq(inst: &UqInstance, tol: f64) -> Result<(Vector, ApproxTrace, ApproxCertificate)> {
    approx_uq_with(inst, &SolverOptions::default(), tol)
}

pub fn approx_uq_with(
    inst: &UqInstance,
    opts: &SolverOptions,
    tol: f64,
) -> Result<(Vector, ApproxTrace, ApproxCertificate)> {
    check_shape(inst)?;
    let n = inst.n();
    let gamma = gamma_uq(inst)?;
    let ratio = guaranteed_ratio(gamma);
    let (prog, meta) = build_socp_uq(inst)?;
    let res = conesolver::solve(&prog, opts)?;
    if !res.is_optimal() {
        return Err(Error::Solver { status: res.status });
    }
    let v = meta.original_value(res.objective);
    let x_star = meta.x_part(&res.x);
    let t_star = meta.t_value(&res.x, 0).unwrap_or(res.x[n]);
    let q = inst.q();
    let b0 = inst.b(0);
    let f_star = inst.objective(&x_star);
    let scale = 1.0 + v.abs();

    let certificate = |x: &Vector| {
        let lower = inst.objective(x);
        ApproxCertificate {
            lower,
            upper: v,
            gamma,
            guaranteed_ratio: ratio,
            ratio_holds: lower >= ratio * v - tol * scale,
        }
    };

    // y with x*ᵀQx* + yᵀQy = t*
    let rho = (t_star - q.quad_form(&x_star)).max(0.0).sqrt();
    let mut e1 = Vector::zeros(n);
    e1[0] = 1.0;
    let y = linalg::pd_inv_sqrt(q, 1e-12)?.mul_vec(&e1) * rho;

    if v - f_star <= tol * scale {
        // α = 0: s₁ = x*, s₂ = −y
        let s2 = -&y;
        let energy_residual = (q.quad_form(&x_star) + q.quad_form(&s2) - t_star).abs();
        let identity_residual = (f_star + q.quad_form(&s2) - v).abs();
        let trace = ApproxTrace {
            shortcut: true,
            y,
            alpha: 0.0,
            s1: x_star.clone(),
            s2,
            t1: 1.0,
            t2: 0.0,
            j_bar: 1,
            x_bar: x_star.clone(),
            tau_bar: 1.0,
            gamma,
            guaranteed_ratio: ratio,
            selection_ok: true,
            energy_residual,
            identity_residual,
        };
        let cert = certificate(&x_star);
        return Ok((x_star, trace, cert));
    }

    // α²yᵀQy + 2α(x*ᵀQy + b₀ᵀy) + f₀(x*) − v = 0
    let (_, alpha) = linalg::quadratic_roots(q.quad_form(&y), q.bilinear(&x_star, &y) + b0.dot(&y), f_star - v)
        .ok_or_else(|| Error::InvalidInput("rounding quadratic has no real root".into()))?;
    let norm = (1.0 + alpha * alpha).sqrt();
    let s1 = (&x_star + &y * alpha) / norm;
    let s2 = (&x_star * alpha - &y) / norm;
    let (t1, t2) = (1.0 / norm, alpha / norm);

    let energy_residual = (q.quad_form(&s1) + q.quad_form(&s2) - t_star).abs();
    let n1 = q.quad_form(&s1) + 2.0 * t1 * b0.dot(&s1);
    let n2 = q.quad_form(&s2) + 2.0 * t2 * b0.dot(&s2);
    let identity_residual = (n1 + n2 - v).abs();

    let beta = inv_energies(inst)?;
    let passes = |x: &Vector| {
        (1..=inst.p()).all(|i| {
            let u = inst.bound(i).upper_or_inf();
            let num = inst.f(i, x) - inst.d(i) + beta[i - 1];
            let den = u - inst.d(i) + beta[i - 1];
            num <= 2.0 * den * (1.0 + 1e-9)
        })
    };
    let cand1 = &s1 / t1;
    let cand2 = if alpha >= 1e-10 { Some(&s2 / t2) } else { None };
    let ok1 = passes(&cand1);
    let ok2 = cand2.as_ref().is_some_and(passes);
    let (j_bar, selection_ok) = match (ok1, ok2) {
        (true, true) => {
            let c2 = cand2.as_ref().expect("checked");
            (if b0.dot(c2) > b0.dot(&cand1) { 2 } else { 1 }, true)
        }
        (true, false) => (1, true),
        (false, true) => (2, true),
        (false, false) => (if alpha <= 1.0 || cand2.is_none() { 1 } else { 2 }, false),
    };
    let mut x_bar = if j_bar == 1 { cand1 } else { cand2.expect("j̄ = 2 needs α > 0") };
    if b0.dot(&x_bar) < 0.0 {
        x_bar = -x_bar;
    }
    let tau = tau_bar(inst, &x_bar)?;
    let x = &x_bar * tau;
    let trace = ApproxTrace {
        shortcut: false,
        y,
        alpha,
        s1,
        s2,
        t1,
        t2,
        j_bar,
        x_bar,
        tau_bar: tau,
        gamma,
        guaranteed_ratio: ratio,
        selection_ok,
        energy_residual,
        identity_residual,
    };
    let cert = certificate(&x);
    Ok((x, trace, cert))
}
