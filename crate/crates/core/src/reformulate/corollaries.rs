//! Builders for the structured problems that reduce to a convex relaxation
//! after splitting `A = (A − λ_min I) + λ_min I`.

use nalgebra::DMatrix;
use serde::Serialize;

use super::{build_cr, build_cr2, check_condition_cc, CertificateReport, ReformulationMeta};
use crate::conesolver::ConeProgram;
use crate::error::{Error, Result};
use crate::linalg::{self, SubspaceBasis, SymMatrix, Vector, DEFAULT_RANK_TOL};
use crate::model::{Bound, QcqpInstance, Sense};

/// `xᵀMx = xᵀQ₁x + a₀·xᵀ(scale·I)x`. Constraints on `xᵀx` are multiplied by
/// `scale` so every sign stays in `{−1, 0, 1}`.
struct Split {
    q1: SymMatrix,
    scale: f64,
    a0: i8,
    lambda: f64,
}

fn identity_split(m: &SymMatrix, passthrough_psd: bool) -> Result<Split> {
    let eig = linalg::sym_eig(m)?;
    let lambda = eig.min();
    let cut = DEFAULT_RANK_TOL * eig.max_abs().max(1.0);
    Ok(if lambda < -cut {
        Split {
            q1: m.shift_diagonal(-lambda),
            scale: -lambda,
            a0: -1,
            lambda,
        }
    } else if passthrough_psd || lambda <= cut {
        Split {
            q1: m.clone(),
            scale: 1.0,
            a0: 0,
            lambda,
        }
    } else {
        Split {
            q1: m.shift_diagonal(-lambda),
            scale: lambda,
            a0: 1,
            lambda,
        }
    })
}

fn check_len(what: &str, v: &Vector, n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::InvalidInstance(format!("{what} has length {}, expected {n}", v.len())));
    }
    Ok(())
}

/// `dim(span(vectors) ∪ ℛ(Q₁)) ≤ n − 1`.
fn range_condition(q1: &SymMatrix, vectors: &[Vector]) -> Result<CertificateReport> {
    let n = q1.order();
    let range = linalg::range_basis(q1, DEFAULT_RANK_TOL)?;
    let dim = linalg::union_dim(&[&range], vectors, DEFAULT_RANK_TOL)?;
    let holds = dim < n;
    Ok(CertificateReport {
        holds,
        rank: dim,
        bound: n - 1,
        dims: Vec::new(),
        reason: format!(
            "dim(span of linear data ∪ ℛ(A − λ_min I)) = {dim} {} n − 1 = {}",
            if holds { "≤" } else { ">" },
            n - 1
        ),
    })
}

/// Trust-region subproblem `min xᵀAx + 2bᵀx  s.t.  xᵀx ≤ 1` as a two-block
/// QCQP: `Q₁ = A − λ_min I` and `Q₂ = |λ_min| I` with `a₀₂ = −1`. PSD `A`
/// passes through unchanged with `Q₂ = I` appearing only in the ball.
pub fn build_trs(a: &SymMatrix, b: &Vector) -> Result<QcqpInstance> {
    let n = a.order();
    check_len("b", b, n)?;
    let s = identity_split(a, true)?;
    QcqpInstance::new(
        n,
        Sense::Min,
        vec![s.q1, SymMatrix::scaled_identity(n, s.scale)],
        vec![vec![1, s.a0], vec![0, 1]],
        vec![b.clone(), Vector::zeros(n)],
        vec![0.0, 0.0],
        vec![Bound::upper(s.scale)],
    )
}

/// Extended trust-region subproblem
/// `min xᵀAx + aᵀx  s.t.  ‖x − x₀‖² ≤ u,  b_iᵀx ≤ β_i`,
/// stored in coordinates `y = x − x₀`.
#[derive(Debug, Clone)]
pub struct EtrsProblem {
    pub instance: QcqpInstance,
    pub center: Vector,
    pub lambda_min: f64,
    pub report: CertificateReport,
}

impl EtrsProblem {
    pub fn to_original(&self, y: &Vector) -> Vector {
        y + &self.center
    }

    /// Relaxation whose meta maps program points back to original `x`.
    pub fn relax(&self) -> Result<(ConeProgram, ReformulationMeta)> {
        let (prog, mut meta) = build_cr(&self.instance)?;
        meta.shifts = vec![self.lambda_min];
        meta.translation = Some(self.center.clone());
        Ok((prog, meta))
    }

    /// Objective in original coordinates.
    pub fn objective(&self, x: &Vector) -> f64 {
        self.instance.objective(&(x - &self.center))
    }

    pub fn is_feasible(&self, x: &Vector, tol: f64) -> bool {
        self.instance.is_feasible(&(x - &self.center), tol)
    }
}

pub fn build_etrs(
    a_mat: &SymMatrix,
    a_lin: &Vector,
    x0: &Vector,
    u: f64,
    rows: &[(Vector, f64)],
) -> Result<EtrsProblem> {
    let n = a_mat.order();
    check_len("linear objective term", a_lin, n)?;
    check_len("ball center", x0, n)?;
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::InvalidBounds(format!("ball radius² must be positive, got {u}")));
    }
    for (i, (bi, beta)) in rows.iter().enumerate() {
        check_len(&format!("row {i}"), bi, n)?;
        if !beta.is_finite() {
            return Err(Error::InvalidBounds(format!("row {i} has non-finite right-hand side")));
        }
    }
    let s = identity_split(a_mat, false)?;
    let ax0 = a_mat.mul_vec(x0);
    let mut signs = vec![vec![1, s.a0], vec![0, 1]];
    let mut b = vec![&ax0 + a_lin * 0.5, Vector::zeros(n)];
    let mut c = vec![x0.dot(&ax0) + a_lin.dot(x0), 0.0];
    let mut bounds = vec![Bound::upper(s.scale * u)];
    for (bi, beta) in rows {
        signs.push(vec![0, 0]);
        b.push(bi * 0.5);
        c.push(0.0);
        bounds.push(Bound::upper(beta - bi.dot(x0)));
    }
    let bs: Vec<Vector> = rows.iter().map(|r| r.0.clone()).collect();
    let report = range_condition(&s.q1, &bs)?;
    let instance = QcqpInstance::new(
        n,
        Sense::Min,
        vec![s.q1, SymMatrix::scaled_identity(n, s.scale)],
        signs,
        b,
        c,
        bounds,
    )?;
    Ok(EtrsProblem {
        instance,
        center: x0.clone(),
        lambda_min: s.lambda,
        report,
    })
}

/// Weighted-distance problem `max_{‖x − x₀‖ ≤ r₀} min_i ω_i‖x − z_i‖²` and
/// its relaxation in `(y, s)` with `y = x − x₀`:
///
/// ```text
/// max s  s.t.  s ≤ ω_i(r₀² − 2(z_i − x₀)ᵀy + ‖z_i − x₀‖²),  ‖y‖ ≤ r₀
/// ```
#[derive(Debug, Clone)]
pub struct WdProgram {
    pub program: ConeProgram,
    pub report: CertificateReport,
    pub center: Vector,
    pub radius: f64,
    pub points: Vec<Vector>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WdSolution {
    pub x: Vector,
    pub value: f64,
}

impl WdProgram {
    pub fn n(&self) -> usize {
        self.center.len()
    }

    /// Relaxation value from a program objective (the program minimises `−s`).
    pub fn relaxation_value(&self, program_value: f64) -> f64 {
        -program_value
    }

    /// `min_i ω_i‖x − z_i‖²`
    pub fn value(&self, x: &Vector) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(z, w)| w * (x - z).norm_squared())
            .fold(f64::INFINITY, f64::min)
    }

    /// Pushes the relaxed `y` onto the sphere `‖y‖ = r₀` along a direction
    /// orthogonal to every `z_i − x₀`, which leaves all constraint rows
    /// unchanged.
    pub fn recover(&self, z: &Vector) -> Result<WdSolution> {
        let n = self.n();
        let mut y = z.rows(0, n).into_owned();
        let r0 = self.radius;
        if y.norm() < r0 * (1.0 - 1e-9) {
            let diffs: Vec<Vector> = self.points.iter().map(|p| p - &self.center).collect();
            let comp = SubspaceBasis::complement_of(n, &diffs, DEFAULT_RANK_TOL)?;
            let Some(d) = comp.columns().first() else {
                return Err(Error::ConditionNotMet(self.report.reason.clone()));
            };
            let yd = y.dot(d);
            let alpha = -yd + (yd * yd + r0 * r0 - y.norm_squared()).sqrt();
            y += d * alpha;
        }
        let x = y + &self.center;
        let value = self.value(&x);
        Ok(WdSolution { x, value })
    }
}

pub fn build_wd(x0: &Vector, r0: f64, points: &[Vector], weights: &[f64]) -> Result<WdProgram> {
    let n = x0.len();
    if n == 0 || points.is_empty() || points.len() != weights.len() {
        return Err(Error::InvalidInstance(format!(
            "{} points and {} weights in dimension {n}",
            points.len(),
            weights.len()
        )));
    }
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::InvalidBounds(format!("radius must be positive, got {r0}")));
    }
    for (i, (z, &w)) in points.iter().zip(weights).enumerate() {
        check_len(&format!("point {i}"), z, n)?;
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidInstance(format!("weight {i} must be positive")));
        }
    }
    let mut prog = ConeProgram::new(n + 1);
    let mut obj = Vector::zeros(n + 1);
    obj[n] = -1.0;
    prog.set_objective(obj, 0.0)?;
    let diffs: Vec<Vector> = points.iter().map(|z| z - x0).collect();
    for (d, &w) in diffs.iter().zip(weights) {
        let mut row = Vector::zeros(n + 1);
        row.rows_mut(0, n).copy_from(&(d * (2.0 * w)));
        row[n] = 1.0;
        prog.add_le(row, w * (r0 * r0 + d.norm_squared()))?;
    }
    let mut a = DMatrix::zeros(n, n + 1);
    a.view_mut((0, 0), (n, n)).fill_with_identity();
    prog.add_soc(a, Vector::zeros(n), Vector::zeros(n + 1), r0)?;
    let rank = linalg::numerical_rank(&diffs, DEFAULT_RANK_TOL)?;
    let holds = rank < n;
    let report = CertificateReport {
        holds,
        rank,
        bound: n - 1,
        dims: Vec::new(),
        reason: format!(
            "rank[z_i − x₀] = {rank} {} n − 1 = {}",
            if holds { "≤" } else { ">" },
            n - 1
        ),
    };
    Ok(WdProgram {
        program: prog,
        report,
        center: x0.clone(),
        radius: r0,
        points: points.to_vec(),
        weights: weights.to_vec(),
    })
}

/// Two-sided trust-region subproblem
/// `min ½xᵀAx + bᵀx  s.t.  α ≤ xᵀx ≤ β` as a two-block QCQP. Returns the
/// instance and the shift `λ_min(½A)`.
pub fn ttrs_instance(a: &SymMatrix, b: &Vector, alpha: f64, beta: f64) -> Result<(QcqpInstance, f64)> {
    let n = a.order();
    check_len("b", b, n)?;
    if !(alpha < beta) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::InvalidBounds(format!("need α < β, got α = {alpha}, β = {beta}")));
    }
    let s = identity_split(&a.scale(0.5), false)?;
    let inst = QcqpInstance::new(
        n,
        Sense::Min,
        vec![s.q1, SymMatrix::scaled_identity(n, s.scale)],
        vec![vec![1, s.a0], vec![0, 1]],
        vec![b * 0.5, Vector::zeros(n)],
        vec![0.0, 0.0],
        vec![Bound::range(s.scale * alpha, s.scale * beta)],
    )?;
    Ok((inst, s.lambda))
}

/// Relaxation of the two-sided trust-region subproblem. The lifted variable
/// of the identity block carries `|λ_min(½A)|·xᵀx`.
pub fn build_ttrs(
    a: &SymMatrix,
    b: &Vector,
    alpha: f64,
    beta: f64,
) -> Result<(ConeProgram, ReformulationMeta, CertificateReport)> {
    let (inst, lambda) = ttrs_instance(a, b, alpha, beta)?;
    let (prog, mut meta) = build_cr2(&inst)?;
    meta.shifts = vec![lambda];
    let report = check_condition_cc(&inst, &meta.lifted_set, DEFAULT_RANK_TOL)?;
    Ok((prog, meta, report))
}

/// `min xᵀQx + cᵀx` over points inside every `inner` ball, outside every
/// `outer` ball and in the polytope `a_kᵀx ≤ b_k`. Balls are `(center, radius)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VtrsData {
    pub q: SymMatrix,
    pub c: Vector,
    pub inner: Vec<(Vector, f64)>,
    pub outer: Vec<(Vector, f64)>,
    pub polytope: Vec<(Vector, f64)>,
}

impl VtrsData {
    pub fn objective(&self, x: &Vector) -> f64 {
        self.q.quad_form(x) + self.c.dot(x)
    }

    pub fn is_feasible(&self, x: &Vector, tol: f64) -> bool {
        self.inner.iter().all(|(m, r)| (x - m).norm_squared() <= r * r + tol)
            && self.outer.iter().all(|(m, r)| (x - m).norm_squared() >= r * r - tol)
            && self.polytope.iter().all(|(a, b)| a.dot(x) <= b + tol)
    }
}

/// Returns the two-block instance, the exactness check over
/// `span{a_k, μ_i, μ_j} ∪ ℛ(Q − λ_min I)`, and `λ_min(Q)`.
pub fn vtrs_instance(data: &VtrsData) -> Result<(QcqpInstance, CertificateReport, f64)> {
    let n = data.q.order();
    check_len("c", &data.c, n)?;
    let s = identity_split(&data.q, false)?;
    let mut signs = vec![vec![1, s.a0]];
    let mut b = vec![&data.c * 0.5];
    let mut c = vec![0.0];
    let mut bounds = Vec::new();
    let mut span = Vec::new();
    for (k, (mu, r)) in data.inner.iter().chain(&data.outer).enumerate() {
        check_len(&format!("ball {k} center"), mu, n)?;
        if !(*r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidBounds(format!("ball {k} radius must be positive")));
        }
        signs.push(vec![0, 1]);
        b.push(mu * -s.scale);
        c.push(s.scale * mu.norm_squared());
        let rhs = s.scale * r * r;
        bounds.push(if k < data.inner.len() {
            Bound::upper(rhs)
        } else {
            Bound::lower(rhs)
        });
        span.push(mu.clone());
    }
    for (k, (a, rhs)) in data.polytope.iter().enumerate() {
        check_len(&format!("polytope row {k}"), a, n)?;
        signs.push(vec![0, 0]);
        b.push(a * 0.5);
        c.push(0.0);
        bounds.push(Bound::upper(*rhs));
        span.push(a.clone());
    }
    if bounds.is_empty() {
        return Err(Error::InvalidInstance("at least one constraint required".into()));
    }
    let report = range_condition(&s.q1, &span)?;
    let inst = QcqpInstance::new(
        n,
        Sense::Min,
        vec![s.q1, SymMatrix::scaled_identity(n, s.scale)],
        signs,
        b,
        c,
        bounds,
    )?;
    Ok((inst, report, s.lambda))
}

pub fn build_vtrs(data: &VtrsData) -> Result<(ConeProgram, ReformulationMeta, CertificateReport)> {
    let (inst, report, lambda) = vtrs_instance(data)?;
    let (prog, mut meta) = build_cr2(&inst)?;
    meta.shifts = vec![lambda];
    Ok((prog, meta, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conesolver::{solve, SolverOptions, SolverStatus};

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    fn solve_min(prog: &ConeProgram) -> f64 {
        let r = solve(prog, &SolverOptions::default()).unwrap();
        assert_eq!(r.status, SolverStatus::Optimal);
        r.objective
    }

    #[test]
    fn trs_negative_identity() {
        let inst = build_trs(&SymMatrix::scaled_identity(2, -1.0), &Vector::zeros(2)).unwrap();
        let (prog, meta) = build_cr(&inst).unwrap();
        assert_eq!(meta.lifted_set, vec![1]);
        assert!((solve_min(&prog) + 1.0).abs() < 1e-7);
    }

    #[test]
    fn trs_psd_is_convex() {
        let inst = build_trs(&SymMatrix::from_diagonal(&[1.0, 2.0]), &v(&[1.0, 0.0])).unwrap();
        assert!(inst.lifted_one_sided().is_empty());
        let (prog, _) = build_cr(&inst).unwrap();
        // interior minimiser x = −A⁻¹b = (−1, 0) on the boundary; value 1 − 2 = −1
        assert!((solve_min(&prog) + 1.0).abs() < 1e-7);
    }

    #[test]
    fn trs_indefinite_vs_polar_grid() {
        let a = SymMatrix::from_diagonal(&[-2.0, 1.0]);
        let b = v(&[1.0, 0.0]);
        let inst = build_trs(&a, &b).unwrap();
        let (prog, _) = build_cr(&inst).unwrap();
        let val = solve_min(&prog);
        let mut best = f64::INFINITY;
        for i in 0..=200 {
            let r = i as f64 / 200.0;
            for k in 0..2000 {
                let th = k as f64 * std::f64::consts::TAU / 2000.0;
                let x = v(&[r * th.cos(), r * th.sin()]);
                best = best.min(a.quad_form(&x) + 2.0 * b.dot(&x));
            }
        }
        // optimum at x = (−1, 0): −2 − 2 = −4
        assert!((val + 4.0).abs() < 1e-6);
        assert!((best - val).abs() < 1e-4);
    }

    #[test]
    fn etrs_conditions() {
        let a = SymMatrix::from_diagonal(&[-1.0, -1.0, 2.0]);
        let p = build_etrs(&a, &Vector::zeros(3), &Vector::zeros(3), 1.0, &[(v(&[0.0, 0.0, 1.0]), 0.5)]).unwrap();
        assert!(p.report.holds);
        // ℛ(A − λ_min I) = span{e₃}, which already contains the row
        assert_eq!(p.report.rank, 1);
        let a2 = SymMatrix::from_diagonal(&[-1.0, 2.0]);
        let rows = [(v(&[1.0, 0.0]), 0.5), (v(&[0.0, 1.0]), 0.5)];
        let p2 = build_etrs(&a2, &Vector::zeros(2), &Vector::zeros(2), 1.0, &rows).unwrap();
        assert!(!p2.report.holds);
        assert_eq!(p2.report.rank, 2);
    }

    #[test]
    fn etrs_without_rows_matches_trs() {
        // shifted ball ‖x − x₀‖² ≤ 1 with A = −I: max distance² from origin
        let a = SymMatrix::scaled_identity(2, -1.0);
        let x0 = v(&[0.5, 0.0]);
        let p = build_etrs(&a, &Vector::zeros(2), &x0, 1.0, &[]).unwrap();
        let (prog, meta) = p.relax().unwrap();
        let r = solve(&prog, &SolverOptions::default()).unwrap();
        assert!((r.objective + 2.25).abs() < 1e-6);
        let (tprog, _) = build_cr(&build_trs(&a, &Vector::zeros(2)).unwrap()).unwrap();
        assert!(solve_min(&tprog) > r.objective);
        assert_eq!(meta.translation, Some(x0));
    }

    #[test]
    fn wd_single_point_at_center() {
        let x0 = v(&[1.0, -1.0]);
        let w = build_wd(&x0, 2.0, std::slice::from_ref(&x0), &[3.0]).unwrap();
        assert!(w.report.holds);
        let r = solve(&w.program, &SolverOptions::default()).unwrap();
        assert!((w.relaxation_value(r.objective) - 12.0).abs() < 1e-6);
        let sol = w.recover(&r.x).unwrap();
        assert!(((&sol.x - &x0).norm() - 2.0).abs() < 1e-6);
        assert!((sol.value - 12.0).abs() < 1e-5);
    }

    #[test]
    fn wd_general_position_fails_condition() {
        let pts = [v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[-1.0, -1.0])];
        let w = build_wd(&Vector::zeros(2), 1.0, &pts, &[1.0; 3]).unwrap();
        assert!(!w.report.holds);
    }

    #[test]
    fn ttrs_negative_identity() {
        let (prog, meta, rep) = build_ttrs(&SymMatrix::scaled_identity(2, -1.0), &Vector::zeros(2), 1.0, 4.0).unwrap();
        assert!(rep.holds);
        assert_eq!(meta.lifted_set, vec![1]);
        let r = solve(&prog, &SolverOptions::default()).unwrap();
        assert!((r.objective + 2.0).abs() < 1e-6);
        // t carries ½·xᵀx
        assert!((meta.t_value(&r.x, 1).unwrap() - 2.0).abs() < 1e-5);
        assert!(matches!(
            build_ttrs(&SymMatrix::identity(2), &Vector::zeros(2), 2.0, 2.0),
            Err(Error::InvalidBounds(_))
        ));
    }

    #[test]
    fn vtrs_without_outer_is_etrs_shape() {
        let data = VtrsData {
            q: SymMatrix::scaled_identity(2, -1.0),
            c: Vector::zeros(2),
            inner: vec![(v(&[0.5, 0.0]), 1.0)],
            outer: vec![],
            polytope: vec![],
        };
        let (prog, _, rep) = build_vtrs(&data).unwrap();
        assert!(rep.holds);
        let r = solve(&prog, &SolverOptions::default()).unwrap();
        assert!((r.objective + 2.25).abs() < 1e-6);
    }
}
