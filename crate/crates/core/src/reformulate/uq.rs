use super::{build_cr2, CertificateReport, ReformulationMeta};
use crate::conesolver::ConeProgram;
use crate::error::{Error, Result};
use crate::linalg::{self, DEFAULT_RANK_TOL};
use crate::model::{QcqpInstance, Sense, UqInstance};

/// A uniform QCQP with PSD `Q` viewed as a one-block structured QCQP.
pub fn uq_as_qcqp(inst: &UqInstance) -> Result<QcqpInstance> {
    let eig = linalg::sym_eig(inst.q())?;
    if eig.min() < -DEFAULT_RANK_TOL * eig.max_abs().max(1.0) {
        return Err(Error::WrongShape(format!(
            "Q is indefinite (λ_min = {:.3e}); use the indefinite relaxation",
            eig.min()
        )));
    }
    QcqpInstance::new(
        inst.n(),
        Sense::Max,
        vec![inst.q().clone()],
        vec![vec![1]; inst.p() + 1],
        inst.bs().to_vec(),
        inst.ds().to_vec(),
        inst.bounds().to_vec(),
    )
}

/// The relaxation of a uniform QCQP with PSD `Q`: variables `(x, t)`,
///
/// ```text
/// max t + 2b₀ᵀx + d₀  s.t.  l_i ≤ t + 2b_iᵀx + d_i ≤ u_i,  xᵀQx ≤ t
/// ```
///
/// stated as minimisation of the negated objective.
pub fn build_socp_uq(inst: &UqInstance) -> Result<(ConeProgram, ReformulationMeta)> {
    build_cr2(&uq_as_qcqp(inst)?)
}

/// `rank[b₁..b_p] ≤ n − 1` or `p = n`.
pub fn check_as3(inst: &UqInstance, tol_rel: f64) -> CertificateReport {
    let n = inst.n();
    let p = inst.p();
    // constraint data is validated finite, so rank cannot fail
    let rank = linalg::numerical_rank(inst.constraint_bs(), tol_rel).unwrap_or(n);
    let holds = rank < n || p == n;
    let reason = if rank < n {
        format!("rank[b] = {rank} ≤ n − 1 = {}", n - 1)
    } else if p == n {
        format!("p = n = {n}")
    } else {
        format!("rank[b] = {rank} = n and p = {p} ≠ n")
    };
    CertificateReport {
        holds,
        rank,
        bound: n - 1,
        dims: Vec::new(),
        reason,
    }
}

/// Splits an indefinite `Q = Q₁ − Q₂` along its positive and negative
/// eigenspaces (near-zero eigenvalues go to neither) and returns the
/// two-block instance together with the check `rank[b] ≤ min(r₁, r₂) − 1`.
pub fn split_indefinite(inst: &UqInstance) -> Result<(QcqpInstance, CertificateReport)> {
    let eig = linalg::sym_eig(inst.q())?;
    let cut = DEFAULT_RANK_TOL * eig.max_abs().max(1.0);
    let q1 = eig.reconstruct_with(|l| if l > cut { l } else { 0.0 });
    let q2 = eig.reconstruct_with(|l| if l < -cut { -l } else { 0.0 });
    let r1 = eig.values.iter().filter(|&&l| l > cut).count();
    let r2 = eig.values.iter().filter(|&&l| l < -cut).count();
    if r1 == 0 || r2 == 0 {
        return Err(Error::WrongShape(format!(
            "Q is semidefinite ({r1} positive, {r2} negative eigenvalues)"
        )));
    }
    let qcqp = QcqpInstance::new(
        inst.n(),
        Sense::Max,
        vec![q1, q2],
        vec![vec![1, -1]; inst.p() + 1],
        inst.bs().to_vec(),
        inst.ds().to_vec(),
        inst.bounds().to_vec(),
    )?;
    let rank = linalg::numerical_rank(inst.constraint_bs(), DEFAULT_RANK_TOL)?;
    let bound = r1.min(r2) - 1;
    let holds = rank <= bound;
    let report = CertificateReport {
        holds,
        rank,
        bound,
        dims: vec![(0, r1), (1, r2)],
        reason: format!(
            "rank[b] = {rank} {} min(r₁, r₂) − 1 = {bound} (r₁ = {r1}, r₂ = {r2})",
            if holds { "≤" } else { ">" }
        ),
    };
    Ok((qcqp, report))
}

/// Relaxation of a uniform QCQP with indefinite `Q`: variables `(x, t₁, t₂)`,
///
/// ```text
/// max t₁ − t₂ + 2b₀ᵀx + d₀  s.t.  l_i ≤ t₁ − t₂ + 2b_iᵀx + d_i ≤ u_i,
///     xᵀQ₁x ≤ t₁,  xᵀQ₂x ≤ t₂
/// ```
pub fn build_socp_indefinite(inst: &UqInstance) -> Result<(ConeProgram, ReformulationMeta, CertificateReport)> {
    let (qcqp, report) = split_indefinite(inst)?;
    let (prog, meta) = build_cr2(&qcqp)?;
    Ok((prog, meta, report))
}
