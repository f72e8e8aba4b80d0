use super::{CertificateReport, LiftedVar, ReformulationMeta};
use crate::conesolver::{row_map, ConeProgram, RowSlot};
use crate::error::{Error, Result};
use crate::linalg::{self, SubspaceBasis, Vector, DEFAULT_RANK_TOL};
use crate::model::{QcqpInstance, Sense};

/// Relaxation of a one-sided structured QCQP: every block with some
/// `a_ij = −1` is replaced by `t_j` with `xᵀQ_jx ≤ t_j`. Blocks outside `J`
/// only ever appear with nonnegative coefficients and get an epigraph
/// variable, which is exact for them.
///
/// Maximisation instances are negated into min form before `J` is computed.
pub fn build_cr(inst: &QcqpInstance) -> Result<(ConeProgram, ReformulationMeta)> {
    if !inst.is_one_sided() {
        return Err(Error::WrongShape(
            "instance has lower bounds; use the two-sided relaxation".into(),
        ));
    }
    let min = min_form(inst)?;
    let lifted_set = min.lifted_one_sided();
    build_lifted(&min, inst.sense(), lifted_set)
}

/// Relaxation of a two-sided structured QCQP. The lifted set `K` holds every
/// block with `a_0j = −1` or appearing in any constraint.
pub fn build_cr2(inst: &QcqpInstance) -> Result<(ConeProgram, ReformulationMeta)> {
    let min = min_form(inst)?;
    let lifted_set = min.lifted_two_sided();
    build_lifted(&min, inst.sense(), lifted_set)
}

fn min_form(inst: &QcqpInstance) -> Result<QcqpInstance> {
    if inst.sense() == Sense::Min {
        return Ok(inst.clone());
    }
    let mut signs = inst.signs().to_vec();
    signs[0] = signs[0].iter().map(|a| -a).collect();
    let mut b = inst.bs().to_vec();
    b[0] = -&b[0];
    let mut c = inst.cs().to_vec();
    c[0] = -c[0];
    QcqpInstance::new(
        inst.n(),
        Sense::Min,
        inst.blocks().to_vec(),
        signs,
        b,
        c,
        inst.bounds().to_vec(),
    )
}

fn build_lifted(
    min: &QcqpInstance,
    sense: Sense,
    lifted_set: Vec<usize>,
) -> Result<(ConeProgram, ReformulationMeta)> {
    let n = min.n();
    let used: Vec<usize> = (0..min.m())
        .filter(|&j| min.signs().iter().any(|row| row[j] != 0))
        .collect();
    let lifted: Vec<LiftedVar> = used
        .iter()
        .enumerate()
        .map(|(k, &j)| LiftedVar { block: j, var: n + k })
        .collect();
    let nv = n + lifted.len();
    let row_of = |i: usize| {
        let mut r = Vector::zeros(nv);
        r.rows_mut(0, n).copy_from(&(min.b(i) * 2.0));
        for l in &lifted {
            r[l.var] = f64::from(min.sign(i, l.block));
        }
        r
    };

    let mut prog = ConeProgram::new(nv);
    prog.set_objective(row_of(0), min.c(0))?;
    let rows = row_map(min.bounds());
    for (k, slot) in rows.iter().enumerate() {
        let i = k + 1;
        let bd = min.bound(i).shifted(min.c(i));
        let r = row_of(i);
        match *slot {
            RowSlot::Free => {}
            RowSlot::Equality(_) => {
                prog.add_eq(r, bd.upper.unwrap())?;
            }
            RowSlot::Upper(_) => {
                prog.add_le(r, bd.upper.unwrap())?;
            }
            RowSlot::Lower(_) => {
                prog.add_ge(r, bd.lower.unwrap())?;
            }
            RowSlot::Both { .. } => {
                prog.add_le(r.clone(), bd.upper.unwrap())?;
                prog.add_ge(r, bd.lower.unwrap())?;
            }
        }
    }
    for l in &lifted {
        let f = linalg::psd_factor(min.block(l.block), DEFAULT_RANK_TOL)?;
        let mut r = nalgebra::DMatrix::zeros(f.nrows(), nv);
        r.view_mut((0, 0), (f.nrows(), n)).copy_from(&f);
        let mut w = Vector::zeros(nv);
        w[l.var] = 1.0;
        prog.add_quad_le(&r, &w, 0.0)?;
    }
    let meta = ReformulationMeta {
        n,
        sense,
        lifted,
        lifted_set,
        rows,
        shifts: Vec::new(),
        translation: None,
    };
    Ok((prog, meta))
}

/// The program point `(x, xᵀQ_jx)` for a point `x` of the source instance
/// (program coordinates).
pub fn lift_point(inst: &QcqpInstance, meta: &ReformulationMeta, x: &Vector) -> Vector {
    let t: Vec<f64> = meta
        .lifted
        .iter()
        .map(|l| inst.block(l.block).quad_form(x))
        .collect();
    meta.layout(x, &t)
}

/// For each `j ∈ J`, the dimension of
/// `span{b₁..b_p} ∪ 𝒩(Q_j) ∪ ⋃_{i≠j} ℛ(Q_i)`; holds iff all are `≤ n − 1`.
pub fn check_condition_c(inst: &QcqpInstance, j_set: &[usize], tol_rel: f64) -> Result<CertificateReport> {
    condition_dims(inst, j_set, tol_rel, "J")
}

/// [`check_condition_c`] over the two-sided lifted set `K`.
pub fn check_condition_cc(inst: &QcqpInstance, k_set: &[usize], tol_rel: f64) -> Result<CertificateReport> {
    condition_dims(inst, k_set, tol_rel, "K")
}

fn condition_dims(inst: &QcqpInstance, set: &[usize], tol_rel: f64, name: &str) -> Result<CertificateReport> {
    let n = inst.n();
    for &j in set {
        if j >= inst.m() {
            return Err(Error::InvalidIndex {
                index: j,
                max: inst.m() - 1,
            });
        }
    }
    if set.is_empty() {
        return Ok(CertificateReport {
            bound: n - 1,
            ..CertificateReport::trivial(&format!("{name} is empty; relaxation is the convex original"))
        });
    }
    let ranges: Vec<SubspaceBasis> = inst
        .blocks()
        .iter()
        .map(|q| linalg::range_basis(q, tol_rel))
        .collect::<Result<_>>()?;
    let bs = &inst.bs()[1..];
    let mut dims = Vec::with_capacity(set.len());
    for &j in set {
        let null = linalg::null_basis(inst.block(j), tol_rel)?;
        let mut bases: Vec<&SubspaceBasis> = vec![&null];
        bases.extend(ranges.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, r)| r));
        dims.push((j, linalg::union_dim(&bases, bs, tol_rel)?));
    }
    let worst = dims.iter().map(|d| d.1).max().unwrap_or(0);
    let holds = worst < n;
    let reason = if holds {
        format!("largest union dimension over {name} is {worst} ≤ n − 1 = {}", n - 1)
    } else {
        let (j, _) = dims.iter().find(|d| d.1 == worst).unwrap();
        format!("block {j}: union dimension {worst} exceeds n − 1 = {}", n - 1)
    };
    Ok(CertificateReport {
        holds,
        rank: worst,
        bound: n - 1,
        dims,
        reason,
    })
}
