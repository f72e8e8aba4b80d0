//! Chebyshev centre of an intersection of balls: Beck's convex relaxation for
//! the centre, and a certified bracket on how far `Ω` reaches from it.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::conesolver::{self, ConeProgram, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::model::BallIntersection;
use crate::recover::{approx_uq_with, guaranteed_ratio};

/// `γ` at or above this is treated as an empty interior.
pub const INTERIOR_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeckCenter {
    pub center: Vector,
    /// Simplex weights with `center = Σλ_i a_i`.
    pub lambda: Vec<f64>,
    /// `min_λ Σλ_i(r_i² − ‖a_i‖²) + ‖Σλ_i a_i‖²`
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaBalls {
    /// `min_x max_i ‖x − a_i‖/r_i`
    pub gamma: f64,
    pub point: Vector,
    /// `γ ≤ 1`, up to solver tolerance.
    pub nonempty: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChebyshevResult {
    pub center: Vector,
    pub lambda: Vec<f64>,
    pub v_dcc: f64,
    /// Centre and value of the same relaxation with the interior point moved
    /// to the origin, centre mapped back. Reported rather than asserted equal
    /// to `center` and `v_dcc`.
    pub center_shifted: Vector,
    pub v_dcc_shifted: f64,
    pub gamma: f64,
    pub gamma_upper: f64,
    /// Interior point the inner problem was centred on.
    pub interior_point: Vector,
    /// Feasible point of `Ω` attaining `lower`.
    pub farthest_point: Vector,
    /// `‖farthest_point − center‖²`
    pub lower: f64,
    /// Relaxation bound on `max_{x∈Ω} ‖x − center‖²`.
    pub upper: f64,
    pub guaranteed_ratio: f64,
    /// `lower ≥ guaranteed_ratio · v_dcc − tol`
    pub ratio_holds: bool,
}

fn solve_optimal(prog: &ConeProgram, opts: &SolverOptions) -> Result<conesolver::SolverResult> {
    let res = conesolver::solve(prog, opts)?;
    if !res.is_optimal() {
        return Err(Error::Solver { status: res.status });
    }
    Ok(res)
}

/// Minimises Beck's dual over the simplex, with an epigraph cone for
/// `‖Σλ_i a_i‖²`.
pub fn beck_center(balls: &BallIntersection) -> Result<BeckCenter> {
    beck_center_with(balls, &SolverOptions::default())
}

pub fn beck_center_with(balls: &BallIntersection, opts: &SolverOptions) -> Result<BeckCenter> {
    let (n, p) = (balls.n(), balls.p());
    let centers = balls.centers();
    let radii = balls.radii();
    // variables (λ_1..λ_p, s)
    let nv = p + 1;
    let mut prog = ConeProgram::new(nv);
    let mut c = Vector::zeros(nv);
    for i in 0..p {
        c[i] = radii[i] * radii[i] - centers[i].norm_squared();
    }
    c[p] = 1.0;
    prog.set_objective(c.clone(), 0.0)?;
    let mut simplex = Vector::from_element(nv, 1.0);
    simplex[p] = 0.0;
    prog.add_eq(simplex, 1.0)?;
    for i in 0..p {
        let mut e = Vector::zeros(nv);
        e[i] = 1.0;
        prog.add_ge(e, 0.0)?;
    }
    let mut r = DMatrix::zeros(n, nv);
    for (i, a) in centers.iter().enumerate() {
        r.column_mut(i).copy_from(a);
    }
    let mut w = Vector::zeros(nv);
    w[p] = 1.0;
    prog.add_quad_le(&r, &w, 0.0)?;
    let res = solve_optimal(&prog, opts)?;

    let mut lambda: Vec<f64> = (0..p).map(|i| res.x[i].max(0.0)).collect();
    let total: f64 = lambda.iter().sum();
    for l in &mut lambda {
        *l /= total;
    }
    let objective = |lambda: &[f64]| {
        let center = centers
            .iter()
            .zip(lambda)
            .fold(Vector::zeros(n), |acc, (a, l)| acc + a * *l);
        let value = (0..p).map(|i| lambda[i] * c[i]).sum::<f64>() + center.norm_squared();
        (center, value)
    };
    let (mut center, mut value) = objective(&lambda);
    if let Some(polished) = polish_support(centers, &c, &lambda) {
        let (pc, pv) = objective(&polished);
        if pv <= value + 1e-9 * (1.0 + value.abs()) {
            (lambda, center, value) = (polished, pc, pv);
        }
    }
    Ok(BeckCenter { center, lambda, value })
}

/// Solves the optimality system on the support of an interior-point `λ`:
/// `c_i + 2a_iᵀz + μ = 0` for `λ_i > 0`, `Σλ = 1`, `z = Σλ_i a_i`. The
/// interior-point centre is only accurate to about the square root of the
/// gap; this recovers it to working precision. Returns `None` unless the
/// solution is nonnegative and no inactive index has a negative reduced cost.
fn polish_support(centers: &[Vector], c: &Vector, lambda: &[f64]) -> Option<Vec<f64>> {
    let support: Vec<usize> = (0..lambda.len()).filter(|&i| lambda[i] > 1e-6).collect();
    let k = support.len();
    let mut m = DMatrix::zeros(k + 1, k + 1);
    let mut rhs = Vector::zeros(k + 1);
    for (r, &i) in support.iter().enumerate() {
        for (s, &j) in support.iter().enumerate() {
            m[(r, s)] = 2.0 * centers[i].dot(&centers[j]);
        }
        m[(r, k)] = 1.0;
        m[(k, r)] = 1.0;
        rhs[r] = -c[i];
    }
    rhs[k] = 1.0;
    let sol = m.svd(true, true).solve(&rhs, 1e-13).ok()?;
    let mut out = vec![0.0; lambda.len()];
    for (r, &i) in support.iter().enumerate() {
        if sol[r] < -1e-12 {
            return None;
        }
        out[i] = sol[r].max(0.0);
    }
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|l| *l /= total);
    let z = support.iter().fold(Vector::zeros(centers[0].len()), |acc, &i| acc + &centers[i] * out[i]);
    let mu = sol[k];
    let scale = 1.0 + c.amax();
    let reduced_ok = (0..lambda.len())
        .filter(|i| !support.contains(i))
        .all(|i| c[i] + 2.0 * centers[i].dot(&z) + mu >= -1e-9 * scale);
    reduced_ok.then_some(out)
}

/// `min s  s.t.  ‖x − a_i‖ ≤ r_i s`. `Ω` is nonempty iff the value is at most
/// one, and has interior iff it is below one.
pub fn gamma_balls(balls: &BallIntersection) -> Result<GammaBalls> {
    gamma_balls_with(balls, &SolverOptions::default())
}

pub fn gamma_balls_with(balls: &BallIntersection, opts: &SolverOptions) -> Result<GammaBalls> {
    let n = balls.n();
    // variables (x, s)
    let nv = n + 1;
    let mut prog = ConeProgram::new(nv);
    let mut c = Vector::zeros(nv);
    c[n] = 1.0;
    prog.set_objective(c, 0.0)?;
    let mut a = DMatrix::zeros(n, nv);
    a.view_mut((0, 0), (n, n)).fill_with_identity();
    for (center, &r) in balls.centers().iter().zip(balls.radii()) {
        let mut cv = Vector::zeros(nv);
        cv[n] = r;
        prog.add_soc(a.clone(), -center, cv, 0.0)?;
    }
    let res = solve_optimal(&prog, opts)?;
    let point = res.x.rows(0, n).into_owned();
    let gamma = balls
        .centers()
        .iter()
        .zip(balls.radii())
        .map(|(a, r)| (&point - a).norm() / r)
        .fold(0.0, f64::max);
    Ok(GammaBalls {
        gamma,
        point,
        nonempty: gamma <= 1.0 + 1e-7,
    })
}

/// `√(n/(2(n+1))) · d_max / r_min`, with `d_max` the diameter of the centres.
pub fn gamma_upper(balls: &BallIntersection) -> f64 {
    let n = balls.n() as f64;
    let centers = balls.centers();
    let mut d_max: f64 = 0.0;
    for (i, a) in centers.iter().enumerate() {
        for b in &centers[i + 1..] {
            d_max = d_max.max((a - b).norm());
        }
    }
    let r_min = balls.radii().iter().cloned().fold(f64::INFINITY, f64::min);
    (n / (2.0 * (n + 1.0))).sqrt() * d_max / r_min
}

/// Beck's centre together with a certified bracket
/// `lower ≤ max_{x∈Ω} ‖x − z̄‖² ≤ upper` and the ratio guarantee
/// `lower ≥ ((1−γ)/(√2+γ))² · v_dcc`.
pub fn chebyshev_certified(balls: &BallIntersection, tol: f64) -> Result<ChebyshevResult> {
    chebyshev_certified_with(balls, &SolverOptions::default(), tol)
}

pub fn chebyshev_certified_with(balls: &BallIntersection, opts: &SolverOptions, tol: f64) -> Result<ChebyshevResult> {
    let beck = beck_center_with(balls, opts)?;
    let gb = gamma_balls_with(balls, opts)?;
    let gamma_up = gamma_upper(balls);
    if gb.gamma >= 1.0 - INTERIOR_MARGIN {
        return Err(Error::PreconditionViolated(format!(
            "ball intersection has no interior (γ = {:.9})",
            gb.gamma
        )));
    }
    let ratio = guaranteed_ratio(gb.gamma);
    let moved = beck_center_with(&balls.translated(&-&gb.point), opts)?;

    // max ‖x − z̄‖² over Ω, with the interior point moved to the origin
    let inner = balls.farthest_point_uq(&beck.center)?;
    let (shifted, offset) = inner.translate_origin(&gb.point)?;
    let shifted = shifted.with_objective(shifted.b(0).clone(), 0.0)?;
    let (x, _, cert) = approx_uq_with(&shifted, opts, tol)?;
    let farthest_point = x + &gb.point;
    let lower = (&farthest_point - &beck.center).norm_squared();
    let upper = cert.upper + offset;
    let scale = 1.0 + beck.value.abs();
    Ok(ChebyshevResult {
        center: beck.center,
        lambda: beck.lambda,
        v_dcc: beck.value,
        center_shifted: moved.center + &gb.point,
        v_dcc_shifted: moved.value,
        gamma: gb.gamma,
        gamma_upper: gamma_up,
        interior_point: gb.point,
        farthest_point,
        lower,
        upper,
        guaranteed_ratio: ratio,
        ratio_holds: lower >= ratio * beck.value - tol * scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    #[test]
    fn single_ball() {
        let balls = BallIntersection::new(vec![v(&[1.0, -2.0])], vec![1.5]).unwrap();
        let beck = beck_center(&balls).unwrap();
        assert!((beck.center - v(&[1.0, -2.0])).norm() < 1e-7);
        assert!((beck.value - 2.25).abs() < 1e-7);
        let res = chebyshev_certified(&balls, 1e-6).unwrap();
        assert!((res.lower - 2.25).abs() < 1e-5, "{}", res.lower);
        assert!((res.upper - 2.25).abs() < 1e-5, "{}", res.upper);
        assert!(res.ratio_holds);
        assert!((&res.center_shifted - &res.center).norm() < 1e-7);
        assert!((res.v_dcc_shifted - res.v_dcc).abs() < 1e-7);
    }

    #[test]
    fn concentric_balls() {
        let a = v(&[0.3, 0.7]);
        let balls = BallIntersection::new(vec![a.clone(), a.clone(), a.clone()], vec![2.0, 1.0, 3.0]).unwrap();
        let beck = beck_center(&balls).unwrap();
        assert!((&beck.center - &a).norm() < 1e-6);
        assert!((beck.value - 1.0).abs() < 1e-6);
        assert!(gamma_balls(&balls).unwrap().gamma < 1e-6);
        assert_eq!(gamma_upper(&balls), 0.0);
    }

    #[test]
    fn symmetric_lens_matches_grid() {
        let balls = BallIntersection::new(vec![v(&[0.5, 0.0]), v(&[-0.5, 0.0])], vec![1.0, 1.0]).unwrap();
        let beck = beck_center(&balls).unwrap();
        assert!(beck.center.norm() < 1e-6);
        let grid = oracle::grid_minmax_cc(&balls, 1e-2).unwrap();
        assert!((beck.value - grid.value).abs() < 5e-3, "{} vs {}", beck.value, grid.value);
    }

    #[test]
    fn touching_balls_have_gamma_one() {
        let balls = BallIntersection::new(vec![v(&[1.0, 0.0]), v(&[-1.0, 0.0])], vec![1.0, 1.0]).unwrap();
        let gb = gamma_balls(&balls).unwrap();
        assert!((gb.gamma - 1.0).abs() < 1e-6);
        assert!(gb.nonempty);
        assert!(matches!(
            chebyshev_certified(&balls, 1e-6),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn gamma_upper_formula() {
        let balls = BallIntersection::new(vec![v(&[0.0, 0.0]), v(&[1.0, 0.0])], vec![1.0, 2.0]).unwrap();
        assert!((gamma_upper(&balls) - (2.0f64 / 6.0).sqrt()).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn chain_holds(
            centers in prop::collection::vec(prop::array::uniform2(-0.5f64..0.5), 1..6),
            radii in prop::collection::vec(1.0f64..1.6, 6),
        ) {
            let cs: Vec<Vector> = centers.iter().map(|c| v(c)).collect();
            let rs = radii[..cs.len()].to_vec();
            let balls = BallIntersection::new(cs, rs).unwrap();
            let res = chebyshev_certified(&balls, 1e-6).unwrap();
            let tol = 1e-4 * (1.0 + res.v_dcc);
            prop_assert!(res.lower <= res.upper + tol);
            prop_assert!(res.upper <= res.v_dcc + tol);
            prop_assert!(res.lower >= res.guaranteed_ratio * res.v_dcc - tol);
            prop_assert!(res.gamma <= res.gamma_upper + 1e-9);
            prop_assert!(balls.contains(&res.farthest_point, 1e-7));
            prop_assert!(res.lambda.iter().all(|&l| l >= 0.0));
            prop_assert!((res.lambda.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
