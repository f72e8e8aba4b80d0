use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use super::format::{read_instance, write_instance, Instance, InstanceFile};
use super::report::Settings;
use crate::chebyshev::chebyshev_certified_with;
use crate::conesolver::{self, certify_strong_duality, ConeProgram, SolverOptions, SolverResult, SolverStatus};
use crate::error::{Error, Result};
use crate::linalg::{self, Vector};
use crate::model::{enumerate_binary_ilp, find_interior_point, BallIntersection, QcqpInstance, Sense, UqInstance};
use crate::oracle;
use crate::recover::{approx_uq_with, tighten_qcqp, tighten_uq, TightenTrace, GAP_TOL};
use crate::reformulate::{
    build_cr, build_cr2, build_socp_uq, check_as3, check_condition_c, check_condition_cc, split_indefinite,
    uq_as_qcqp, CertificateReport, ReformulationMeta,
};

/// Relaxation to build, overriding the choice implied by the file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ForceKind {
    /// Single-cone relaxation of a uniform QCQP.
    Uq,
    /// Block-lifted relaxation of a structured QCQP.
    Qcqp,
}

/// A command's structured result and the exit code it asks for.
pub struct Outcome {
    pub result: Value,
    pub exit: i32,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Outcome { result, exit: 0 }
    }
}

pub fn solver_options(s: &Settings) -> SolverOptions {
    SolverOptions {
        feas_tol: s.tol_feas,
        abs_gap: s.gap,
        rel_gap: s.gap,
        max_iter: s.max_iter,
        ..SolverOptions::default()
    }
}

#[derive(Debug, Serialize)]
struct RelaxationSummary {
    builder: &'static str,
    status: SolverStatus,
    /// In the source problem's sense.
    value: Option<f64>,
    iterations: usize,
    primal_residual: f64,
    dual_residual: f64,
    complementarity: f64,
}

#[derive(Debug, Serialize)]
struct CertificateSummary {
    condition: &'static str,
    /// `"<condition>: holds"` or `"<condition>: fails"`
    verdict: String,
    holds: bool,
    rank: usize,
    bound: usize,
    dims: Vec<(usize, usize)>,
    reason: String,
}

impl CertificateSummary {
    fn new(condition: &'static str, r: &CertificateReport) -> Self {
        CertificateSummary {
            condition,
            verdict: format!("{condition}: {}", if r.holds { "holds" } else { "fails" }),
            holds: r.holds,
            rank: r.rank,
            bound: r.bound,
            dims: r.dims.clone(),
            reason: r.reason.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
struct Recovered {
    x: Vec<f64>,
    objective: f64,
    max_violation: f64,
    remaining_gap: f64,
    steps: usize,
}

#[derive(Debug, Serialize)]
pub struct SolveSummary {
    kind: &'static str,
    relaxation: RelaxationSummary,
    certificate: Option<CertificateSummary>,
    duality: Option<Value>,
    #[serde(serialize_with = "yes_no")]
    exact: bool,
    recovered: Option<Recovered>,
    recovery_error: Option<String>,
}

fn yes_no<S: serde::Serializer>(v: &bool, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(if *v { "yes" } else { "no" })
}

fn relaxation_summary(builder: &'static str, res: &SolverResult, meta: &ReformulationMeta) -> RelaxationSummary {
    RelaxationSummary {
        builder,
        status: res.status,
        value: res.is_optimal().then(|| meta.original_value(res.objective)),
        iterations: res.iterations,
        primal_residual: res.primal_residual.max(),
        dual_residual: res.dual_residual,
        complementarity: res.gap,
    }
}

fn solve_program(prog: &ConeProgram, s: &Settings) -> Result<SolverResult> {
    conesolver::solve(prog, &solver_options(s))
}

fn recovered(
    trace: &TightenTrace,
    x: Vector,
    objective: impl Fn(&Vector) -> f64,
    violation: impl Fn(&Vector) -> f64,
) -> Recovered {
    Recovered {
        objective: objective(&x),
        max_violation: violation(&x),
        remaining_gap: trace.final_gap,
        steps: trace.steps.len(),
        x: x.as_slice().to_vec(),
    }
}

/// Relaxes, certifies and, when certified, recovers an optimal point.
pub fn solve_uq(u: &UqInstance, force: Option<ForceKind>, s: &Settings) -> Result<SolveSummary> {
    let eig = linalg::sym_eig(u.q())?;
    let scale = eig.max_abs().max(1.0);
    let psd = eig.min() >= -s.tol_rank * scale;
    let pd = eig.min() > s.tol_rank * scale;
    if !pd || force == Some(ForceKind::Qcqp) {
        let (q, report, builder) = if psd {
            (uq_as_qcqp(u)?, None, "uq-as-qcqp")
        } else {
            let (q, r) = split_indefinite(u)?;
            (q, Some(r), "indefinite-split")
        };
        return solve_qcqp_with(&q, report, builder, "uq", s);
    }
    let (prog, meta) = build_socp_uq(u)?;
    let res = solve_program(&prog, s)?;
    let relaxation = relaxation_summary("socp", &res, &meta);
    let cert = check_as3(u, s.tol_rank);
    let mut summary = SolveSummary {
        kind: "uq",
        relaxation,
        certificate: Some(CertificateSummary::new("as3", &cert)),
        duality: None,
        exact: false,
        recovered: None,
        recovery_error: None,
    };
    if !res.is_optimal() {
        return Ok(summary);
    }
    summary.duality = Some(match certify_strong_duality(u, &res) {
        Ok(d) => json!({"primal": d.primal_value, "dual": d.dual_value, "gap": d.gap, "holds": d.holds}),
        Err(e) => json!({"error": e.to_string()}),
    });
    if cert.holds {
        match tighten_uq(u, &res, GAP_TOL) {
            Ok((x, trace)) => {
                summary.exact = true;
                summary.recovered = Some(recovered(&trace, x, |x| u.objective(x), |x| u.max_violation(x)));
            }
            Err(e) => summary.recovery_error = Some(e.to_string()),
        }
    }
    Ok(summary)
}

pub fn solve_qcqp(q: &QcqpInstance, s: &Settings) -> Result<SolveSummary> {
    solve_qcqp_with(q, None, "", "qcqp", s)
}

fn solve_qcqp_with(
    q: &QcqpInstance,
    report: Option<CertificateReport>,
    builder: &'static str,
    kind: &'static str,
    s: &Settings,
) -> Result<SolveSummary> {
    let one_sided = q.is_one_sided();
    let (prog, meta) = if one_sided { build_cr(q)? } else { build_cr2(q)? };
    let builder = match (builder, one_sided) {
        ("", true) => "cr",
        ("", false) => "cr2",
        (b, _) => b,
    };
    let res = solve_program(&prog, s)?;
    let relaxation = relaxation_summary(builder, &res, &meta);
    let (name, cert) = if one_sided {
        ("c", check_condition_c(q, &meta.lifted_set, s.tol_rank)?)
    } else {
        ("cc", check_condition_cc(q, &meta.lifted_set, s.tol_rank)?)
    };
    let (name, cert) = match report {
        Some(r) => ("indefinite-split", r),
        None => (name, cert),
    };
    let mut summary = SolveSummary {
        kind,
        relaxation,
        certificate: Some(CertificateSummary::new(name, &cert)),
        duality: None,
        exact: false,
        recovered: None,
        recovery_error: None,
    };
    if !res.is_optimal() {
        return Ok(summary);
    }
    match tighten_qcqp(q, &res, &meta, GAP_TOL) {
        Ok((x, trace)) => {
            let x = match &meta.translation {
                Some(v) => x + v,
                None => x,
            };
            summary.exact = true;
            summary.recovered = Some(recovered(&trace, x, |x| q.objective(x), |x| q.max_violation(x)));
        }
        Err(e) => summary.recovery_error = Some(e.to_string()),
    }
    Ok(summary)
}

fn as_uniform(q: &QcqpInstance) -> Result<UqInstance> {
    let uniform = q.blocks().len() == 1 && q.signs().iter().all(|row| row[0] == 1);
    if !uniform {
        return Err(Error::WrongShape(
            "only a single block with unit signs can be relaxed as a uniform QCQP".into(),
        ));
    }
    if q.sense() != Sense::Max {
        return Err(Error::WrongShape("uniform relaxation expects a maximisation instance".into()));
    }
    UqInstance::new(q.block(0).clone(), q.bs().to_vec(), q.cs().to_vec(), q.bounds().to_vec())
}

fn solve_exit(summary: &SolveSummary, require_exact: bool) -> i32 {
    if summary.relaxation.status != SolverStatus::Optimal {
        4
    } else if require_exact && !summary.exact {
        3
    } else {
        0
    }
}

pub fn cmd_solve(inst: &Instance, force: Option<ForceKind>, require_exact: bool, s: &Settings) -> Result<Outcome> {
    let summary = match inst {
        Instance::Uq(u) => solve_uq(u, force, s)?,
        Instance::Qcqp(q) => match force {
            Some(ForceKind::Uq) => solve_uq(&as_uniform(q)?, None, s)?,
            _ => solve_qcqp(q, s)?,
        },
        Instance::Ilp(ilp) => solve_uq(&ilp.to_uq()?, force, s)?,
        Instance::Balls(b) => return cmd_cheby(b, s),
    };
    let exit = solve_exit(&summary, require_exact);
    Ok(Outcome {
        result: serde_json::to_value(&summary).expect("summaries serialise"),
        exit,
    })
}

/// Moves a strictly interior point to the origin and zeroes `d₀`, returning
/// the shifted instance, the shift and the dropped objective constant.
fn centred(u: &UqInstance, s: &Settings) -> Result<(UqInstance, Vector, f64)> {
    let interior = (1..=u.p()).all(|i| u.bound(i).upper.is_some_and(|up| u.d(i) < up));
    let (shifted, shift, offset) = if interior {
        (u.clone(), Vector::zeros(u.n()), u.d(0))
    } else {
        let ip = find_interior_point(u, &solver_options(s))?;
        if ip.margin <= 0.0 {
            return Err(Error::PreconditionViolated(format!(
                "feasible set has no interior point (best margin {:e})",
                ip.margin
            )));
        }
        let (t, off) = u.translate_origin(&ip.x)?;
        (t, ip.x, off)
    };
    let zeroed = shifted.with_objective(shifted.b(0).clone(), 0.0)?;
    Ok((zeroed, shift, offset))
}

pub fn cmd_approx(inst: &Instance, s: &Settings) -> Result<Outcome> {
    let u = match inst {
        Instance::Uq(u) => u.clone(),
        Instance::Ilp(ilp) => ilp.to_uq()?,
        other => {
            return Err(Error::WrongShape(format!(
                "approx needs a uniform instance, got {}",
                other.kind()
            )))
        }
    };
    for i in 1..=u.p() {
        let bd = u.bound(i);
        if bd.lower.is_some() || bd.upper.is_none() {
            return Err(Error::WrongShape(format!("row {i} must be an upper bound only")));
        }
    }
    let (work, shift, offset) = centred(&u, s)?;
    let (y, trace, cert) = approx_uq_with(&work, &solver_options(s), s.ratio_tol)?;
    let x = &y + &shift;
    let result = json!({
        "x": x.as_slice(),
        "objective": u.objective(&x),
        "max_violation": u.max_violation(&x),
        "relaxation_value": cert.upper + offset,
        "shift": shift.as_slice(),
        "objective_offset": offset,
        "gamma": cert.gamma,
        "tau_bar": trace.tau_bar,
        "alpha": trace.alpha,
        "j_bar": trace.j_bar,
        "shortcut": trace.shortcut,
        "selection_ok": trace.selection_ok,
        "identity_residual": trace.identity_residual,
        "ratio": {
            "lower": cert.lower,
            "upper": cert.upper,
            "guaranteed_ratio": cert.guaranteed_ratio,
            "bound": cert.guaranteed_ratio * cert.upper,
            "holds": cert.ratio_holds,
            "line": format!(
                "f0(x) - offset = {} >= {} * {} = {}",
                cert.lower,
                cert.guaranteed_ratio,
                cert.upper,
                cert.guaranteed_ratio * cert.upper
            ),
        },
    });
    let exit = if cert.ratio_holds && trace.selection_ok { 0 } else { 3 };
    Ok(Outcome { result, exit })
}

pub fn cmd_cheby(balls: &BallIntersection, s: &Settings) -> Result<Outcome> {
    let res = chebyshev_certified_with(balls, &solver_options(s), s.ratio_tol)?;
    let mut value = serde_json::to_value(&res).expect("results serialise");
    value["chain"] = json!(format!(
        "{} * v_dcc = {} <= lower = {} <= upper = {} <= v_dcc = {}",
        res.guaranteed_ratio,
        res.guaranteed_ratio * res.v_dcc,
        res.lower,
        res.upper,
        res.v_dcc
    ));
    let exit = if res.ratio_holds { 0 } else { 3 };
    Ok(Outcome { result: value, exit })
}

/// The uniform instance an ILP reduces to, in canonical file form.
pub fn cmd_reduce_ilp(inst: &Instance) -> Result<String> {
    match inst {
        Instance::Ilp(ilp) => Ok(write_instance(&InstanceFile::from_instance(&Instance::Uq(ilp.to_uq()?)))),
        other => Err(Error::WrongShape(format!("reduce-ilp needs an ilp instance, got {}", other.kind()))),
    }
}

pub fn cmd_oracle(inst: &Instance, s: &Settings) -> Result<Outcome> {
    let result = match inst {
        Instance::Uq(u) if oracle::is_binary_encoded(u) => {
            let b = oracle::binary_max_uq(u)?;
            json!({"method": "binary", "value": b.value, "argmax": b.argmax.as_slice()})
        }
        Instance::Uq(u) => {
            let grid = oracle::grid_max_uq_refined(u, None, s.grid_h, 2)?;
            let boundary = if linalg::lambda_min(u.q())? > 0.0 {
                Some(oracle::boundary_max_uq(u, s.grid_h / 10.0)?)
            } else {
                None
            };
            let radius = oracle::infer_box(u)?
                .iter()
                .map(|(lo, hi)| hi - lo)
                .fold(0.0, f64::max);
            let sample = oracle::sample_max_uq(u, &grid.argmax, radius, s.samples, s.seed)?;
            let best = boundary.as_ref().map_or(grid.value, |b| b.value.max(grid.value));
            json!({"method": "grid", "value": best, "grid": grid, "boundary": boundary, "sample": sample})
        }
        Instance::Ilp(ilp) => {
            let reduced = oracle::binary_max_uq(&ilp.to_uq()?)?;
            let enumerated = enumerate_binary_ilp(&ilp.c, &ilp.a, &ilp.rhs);
            let matches = enumerated.as_ref().is_some_and(|(v, _)| *v == reduced.value);
            json!({
                "value": reduced.value,
                "argmax": reduced.argmax.as_slice(),
                "enumerated": enumerated.map(|(v, x)| json!({"value": v, "x": x.as_slice()})),
                "matches_enumeration": matches,
            })
        }
        Instance::Balls(b) => {
            let r = oracle::grid_minmax_cc(b, s.grid_h)?;
            json!({"value": r.value, "center": r.center.as_slice(), "boundary_points": r.boundary_points})
        }
        Instance::Qcqp(_) => {
            return Err(Error::WrongShape(
                "no reference oracle for structured instances; convert to uq".into(),
            ))
        }
    };
    Ok(Outcome::ok(result))
}

#[derive(Debug, Serialize)]
pub struct BatchRow {
    pub file: String,
    pub kind: String,
    pub status: String,
    pub value: Option<f64>,
    pub certificate: Option<bool>,
    pub exact: Option<bool>,
    pub ratio: Option<f64>,
    pub millis: f64,
    pub exit: i32,
}

fn batch_row(path: &Path, s: &Settings) -> BatchRow {
    let start = Instant::now();
    let file = path.file_name().map_or_else(String::new, |f| f.to_string_lossy().into_owned());
    let mut row = BatchRow {
        file,
        kind: "-".into(),
        status: "ok".into(),
        value: None,
        certificate: None,
        exact: None,
        ratio: None,
        millis: 0.0,
        exit: 0,
    };
    let outcome = read_instance(path).and_then(|(_, inst)| {
        row.kind = inst.kind().into();
        match &inst {
            Instance::Balls(b) => {
                let res = chebyshev_certified_with(b, &solver_options(s), s.ratio_tol)?;
                row.value = Some(res.v_dcc);
                row.certificate = Some(res.ratio_holds);
                row.ratio = Some(res.guaranteed_ratio);
                Ok(if res.ratio_holds { 0 } else { 3 })
            }
            _ => {
                let out = cmd_solve(&inst, None, false, s)?;
                let r = &out.result;
                row.value = r["relaxation"]["value"].as_f64();
                row.certificate = r["certificate"]["holds"].as_bool();
                row.exact = r["exact"].as_str().map(|e| e == "yes");
                row.ratio = row.exact.and_then(|e| e.then_some(1.0));
                if let Some(st) = r["relaxation"]["status"].as_str() {
                    if st != "Optimal" {
                        row.status = st.to_string();
                    }
                }
                Ok(out.exit)
            }
        }
    });
    match outcome {
        Ok(code) => row.exit = code,
        Err(e) => {
            row.exit = super::exit_code(&e);
            row.status = e.to_string();
        }
    }
    row.millis = start.elapsed().as_secs_f64() * 1e3;
    row
}

pub fn cmd_batch(dir: &Path, s: &Settings) -> Result<(Vec<BatchRow>, i32)> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::Parse(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let rows: Vec<BatchRow> = paths.iter().map(|p| batch_row(p, s)).collect();
    let exit = rows.iter().map(|r| r.exit).max().unwrap_or(0);
    Ok((rows, exit))
}

pub fn batch_table(rows: &[BatchRow]) -> String {
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.9}"));
    let flag = |v: Option<bool>| v.map_or_else(|| "-".to_string(), |b| if b { "yes" } else { "no" }.to_string());
    let mut out = format!(
        "{:<28} {:<6} {:>16} {:>5} {:>5} {:>12} {:>10}  {}\n",
        "file", "kind", "value", "cert", "exact", "ratio", "ms", "status"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<28} {:<6} {:>16} {:>5} {:>5} {:>12} {:>10.2}  {}\n",
            r.file,
            r.kind,
            fmt(r.value),
            flag(r.certificate),
            flag(r.exact),
            fmt(r.ratio),
            r.millis,
            r.status
        ));
    }
    out
}
