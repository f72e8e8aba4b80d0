//! Acceptance criteria, one pass/fail line each. Runs without the libtest
//! harness so the lines are always printed; exits nonzero if any fails.

mod common;

use std::time::{Duration, Instant};

use common::{random_balls, random_interior_uq, random_low_rank_uq, random_vec, relax, rng, v};
use nalgebra::DMatrix;
use rand::Rng;
use uqcone::chebyshev::{beck_center, chebyshev_certified, gamma_balls};
use uqcone::conesolver::{certify_strong_duality, solve, ConeProgram, SolverOptions, SolverResult, SolverStatus};
use uqcone::model::{enumerate_binary_ilp, ilp_to_uq};
use uqcone::oracle::{binary_max_uq, boundary_max_uq, grid_max_uq, grid_maximize, grid_minmax_cc, trs_secular};
use uqcone::recover::{approx_uq, tighten_uq, GAP_TOL};
use uqcone::reformulate::{build_cr, build_etrs, build_socp_uq, build_trs, build_ttrs, build_vtrs, build_wd, check_as3, VtrsData};
use uqcone::{Bound, Error, SymMatrix, UqInstance, Vector};

struct Check {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Check { failures: Vec::new(), notes: Vec::new() }
    }

    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn runtime(&mut self, start: Instant, limit: Duration) {
        let took = start.elapsed();
        self.note(format!("{:.2}s", took.as_secs_f64()));
        self.require(took < limit, || format!("took {:.2}s, limit {:.0}s", took.as_secs_f64(), limit.as_secs_f64()));
    }
}

fn example1() -> UqInstance {
    UqInstance::new(
        SymMatrix::identity(1),
        vec![v(&[0.0]), v(&[1.0]), v(&[-1.0])],
        vec![0.0; 3],
        vec![Bound::range(1.0, 3.0), Bound::range(-1.0, 3.0)],
    )
    .unwrap()
}

fn criterion_1() -> Check {
    let mut c = Check::new();
    let start = Instant::now();
    let inst = example1();
    let grid = grid_max_uq(&inst, None, 1e-4).unwrap();
    let (res, value) = relax(&inst);
    let as3 = check_as3(&inst, 1e-8);
    c.runtime(start, Duration::from_secs(1));
    c.require(res.status == SolverStatus::Optimal, || format!("relaxation status {:?}", res.status));
    c.require((grid.value - 1.0).abs() <= 2e-4, || format!("v(U) = {} (want 1 ± 2e-4)", grid.value));
    c.require((value - 3.0).abs() <= 1e-6, || format!("v(S) = {value} (want 3 ± 1e-6)"));
    c.require(!as3.holds, || "as3 reported as holding".into());
    c.note(format!("v(U) = {:.6}, v(S) = {:.9}, as3 = {}", grid.value, value, as3.holds));
    c
}

fn exactness_instances() -> Vec<UqInstance> {
    let mut r = rng(2);
    (0..200)
        .map(|k| {
            let n = 2 + k % 2;
            let p = r.random_range(1..n);
            random_low_rank_uq(&mut r, n, p)
        })
        .collect()
}

fn criterion_2() -> Check {
    let mut c = Check::new();
    let start = Instant::now();
    let mut worst_oracle: f64 = 0.0;
    let mut worst_value: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    for (k, inst) in exactness_instances().iter().enumerate() {
        let (res, value) = relax(inst);
        if res.status != SolverStatus::Optimal {
            c.require(false, || format!("instance {k}: status {:?}", res.status));
            continue;
        }
        let as3 = check_as3(inst, 1e-8);
        c.require(as3.holds, || format!("instance {k}: as3 fails ({})", as3.reason));
        let reference = boundary_max_uq(inst, 1e-2).unwrap().value;
        worst_oracle = worst_oracle.max((value - reference).abs());
        c.require((value - reference).abs() <= 2e-3, || format!("instance {k}: v = {value}, oracle {reference}"));
        match tighten_uq(inst, &res, GAP_TOL) {
            Ok((x, trace)) => {
                let viol = inst.max_violation(&x);
                let dv = (inst.objective(&x) - value).abs();
                worst_value = worst_value.max(dv);
                worst_gap = worst_gap.max(trace.final_gap);
                c.require(viol <= 1e-6, || format!("instance {k}: violation {viol:e}"));
                c.require(dv <= 1e-5, || format!("instance {k}: |f0(x) − v| = {dv:e}"));
                c.require(trace.final_gap <= 1e-6, || format!("instance {k}: cone gap {:e}", trace.final_gap));
            }
            Err(e) => c.require(false, || format!("instance {k}: {e}")),
        }
    }
    c.runtime(start, Duration::from_secs(120));
    c.note(format!(
        "max |v − oracle| = {worst_oracle:.2e}, max |f0(x) − v| = {worst_value:.2e}, max gap = {worst_gap:.2e}"
    ));
    c
}

fn ratio_instances() -> Vec<UqInstance> {
    let mut r = rng(3);
    (0..200)
        .map(|_| {
            let n = r.random_range(2..=10);
            let p = r.random_range(n + 2..=n + 6);
            random_interior_uq(&mut r, n, p)
        })
        .collect()
}

fn criterion_3() -> Check {
    let mut c = Check::new();
    let start = Instant::now();
    let mut min_slack = f64::INFINITY;
    let mut shortcuts = 0;
    for (k, inst) in ratio_instances().iter().enumerate() {
        let (x, trace, cert) = match approx_uq(inst, 1e-7) {
            Ok(t) => t,
            Err(e) => {
                c.require(false, || format!("instance {k}: {e}"));
                continue;
            }
        };
        let scale = inst.scale();
        let viol = inst.max_violation(&x);
        let slack = cert.lower - cert.guaranteed_ratio * cert.upper;
        min_slack = min_slack.min(slack / scale);
        shortcuts += usize::from(trace.shortcut);
        c.require(viol <= 1e-6, || format!("instance {k}: violation {viol:e}"));
        c.require(slack >= -1e-5 * scale, || {
            format!("instance {k}: f0(x) = {} < {} · {}", cert.lower, cert.guaranteed_ratio, cert.upper)
        });
        c.require(trace.selection_ok, || format!("instance {k}: selection test failed for both pieces"));
        let id_tol = 1e-8 * scale.max(cert.upper.abs());
        c.require(trace.identity_residual <= id_tol, || {
            format!("instance {k}: piece identity residual {:e}", trace.identity_residual)
        });
        c.require(trace.energy_residual <= 1e-8 * (1.0 + cert.upper.abs()), || {
            format!("instance {k}: energy residual {:e}", trace.energy_residual)
        });
    }
    c.runtime(start, Duration::from_secs(120));
    c.note(format!("min (f0(x) − ratio·v)/scale = {min_slack:.3e}, {shortcuts} shortcut(s)"));
    c
}

fn criterion_4() -> Check {
    let mut c = Check::new();
    let mut instances = vec![example1()];
    instances.extend(exactness_instances());
    instances.extend(ratio_instances());
    let mut worst: f64 = 0.0;
    let mut solved = 0;
    for (k, inst) in instances.iter().enumerate() {
        let (res, value) = relax(inst);
        if res.status != SolverStatus::Optimal {
            continue;
        }
        solved += 1;
        match certify_strong_duality(inst, &res) {
            Ok(d) => {
                let rel = (d.dual_value - value).abs() / (1.0 + value.abs());
                worst = worst.max(rel);
                c.require(rel <= 1e-5, || format!("instance {k}: d(λ) = {}, v = {value}", d.dual_value));
            }
            Err(e) => c.require(false, || format!("instance {k}: {e}")),
        }
    }
    c.note(format!("{solved} of {} solves optimal, max |d(λ) − v|/(1+|v|) = {worst:.2e}", instances.len()));
    c
}

fn criterion_5() -> Check {
    let mut c = Check::new();
    let start = Instant::now();
    let mut r = rng(5);

    let mut worst_a: f64 = 0.0;
    for k in 0..40 {
        let balls = random_balls(&mut r, 2, 2);
        let beck = beck_center(&balls).unwrap();
        let grid = grid_minmax_cc(&balls, 5e-3).unwrap();
        let d = (beck.value - grid.value).abs();
        worst_a = worst_a.max(d);
        c.require(d <= 5e-3, || format!("(a) instance {k}: v_dcc = {}, grid {}", beck.value, grid.value));
    }

    let mut worst_b = f64::INFINITY;
    let mut shifted_gap: f64 = 0.0;
    for k in 0..60 {
        let p = 4 + k % 3;
        let balls = random_balls(&mut r, 2, p);
        match chebyshev_certified(&balls, 1e-6) {
            Ok(res) => {
                let tol = 1e-4 * (1.0 + res.v_dcc.abs());
                worst_b = worst_b.min(res.lower - res.guaranteed_ratio * res.v_dcc);
                shifted_gap = shifted_gap
                    .max((&res.center_shifted - &res.center).amax())
                    .max((res.v_dcc_shifted - res.v_dcc).abs());
                c.require(res.lower <= res.upper + tol, || format!("(b) instance {k}: lower {} > upper {}", res.lower, res.upper));
                c.require(res.upper <= res.v_dcc + tol, || format!("(b) instance {k}: upper {} > v_dcc {}", res.upper, res.v_dcc));
                c.require(res.lower >= res.guaranteed_ratio * res.v_dcc - tol, || {
                    format!("(b) instance {k}: lower {} < {} · {}", res.lower, res.guaranteed_ratio, res.v_dcc)
                });
                c.require(res.gamma <= res.gamma_upper + 1e-9, || {
                    format!("(b) instance {k}: γ = {} > bound {}", res.gamma, res.gamma_upper)
                });
            }
            Err(e) => c.require(false, || format!("(b) instance {k}: {e}")),
        }
    }

    let mut worst_c: f64 = 0.0;
    for k in 0..40 {
        let p = 1 + k % 6;
        let balls = random_balls(&mut r, 2, p);
        let shift = random_vec(&mut r, 2, 3.0);
        let moved = balls.translated(&shift);
        let (b0, b1) = (beck_center(&balls).unwrap(), beck_center(&moved).unwrap());
        let (g0, g1) = (gamma_balls(&balls).unwrap(), gamma_balls(&moved).unwrap());
        let dz = (&b1.center - &shift - &b0.center).amax();
        let dv = (b1.value - b0.value).abs();
        let dg = (g1.gamma - g0.gamma).abs();
        worst_c = worst_c.max(dz).max(dv).max(dg);
        c.require(dz <= 1e-7 && dv <= 1e-7 && dg <= 1e-7, || {
            format!("(c) instance {k}: Δz̄ = {dz:e}, Δv_dcc = {dv:e}, Δγ = {dg:e}")
        });
    }
    c.runtime(start, Duration::from_secs(120));
    c.note(format!(
        "(a) max |v_dcc − grid| = {worst_a:.2e}; (b) min lower − ratio·v_dcc = {worst_b:.2e}, shifted vs unshifted {shifted_gap:.2e}; (c) max drift = {worst_c:.2e}"
    ));
    c
}

fn solved(prog: &ConeProgram) -> Result<SolverResult, String> {
    let res = solve(prog, &SolverOptions::default()).map_err(|e| e.to_string())?;
    if res.status != SolverStatus::Optimal {
        return Err(format!("status {:?}", res.status));
    }
    Ok(res)
}

/// `R diag(λ) Rᵀ` with a random rotation; returns the matrix and the
/// eigenvector of the larger eigenvalue.
fn rotated_2x2(r: &mut impl Rng, l1: f64, l2: f64) -> (SymMatrix, Vector) {
    let th: f64 = r.random_range(0.0..std::f64::consts::PI);
    let (u1, u2) = (v(&[th.cos(), th.sin()]), v(&[-th.sin(), th.cos()]));
    let m = &u1 * u1.transpose() * l1 + &u2 * u2.transpose() * l2;
    (SymMatrix::symmetrize(&m), u2)
}

fn grid_min(
    bbox: &[(f64, f64)],
    feasible: impl Fn(&Vector) -> bool,
    objective: impl Fn(&Vector) -> f64,
) -> f64 {
    -grid_maximize(bbox, 1e-2, 2, feasible, |x| -objective(x)).unwrap().value
}

fn criterion_6() -> Check {
    let mut c = Check::new();
    let mut r = rng(6);
    let mut worst_trs: f64 = 0.0;

    let mut trs_cases: Vec<(SymMatrix, Vector)> = (0..12)
        .map(|k| {
            let n = 2 + k % 2;
            let m = DMatrix::from_fn(n, n, |_, _| r.random_range(-1.0..1.0));
            (SymMatrix::symmetrize(&(&m + m.transpose())), random_vec(&mut r, n, 1.0))
        })
        .collect();
    // hard case: b orthogonal to the bottom eigenvector, and tiny
    trs_cases.push((SymMatrix::from_diagonal(&[-1.0, -1.0, 0.0]), v(&[0.0, 0.0, 1e-3])));
    trs_cases.push((SymMatrix::from_diagonal(&[-2.0, 1.0]), v(&[0.0, 0.3])));
    for (k, (a, b)) in trs_cases.iter().enumerate() {
        let reference = trs_secular(a, b).unwrap();
        let value = build_trs(a, b)
            .and_then(|inst| build_cr(&inst))
            .map_err(|e| e.to_string())
            .and_then(|(prog, meta)| solved(&prog).map(|res| meta.original_value(res.objective)));
        match value {
            Ok(val) => {
                worst_trs = worst_trs.max((val - reference.value).abs());
                c.require((val - reference.value).abs() <= 1e-6, || {
                    format!("TRS {k}: {val} vs secular {} (hard case {})", reference.value, reference.hard_case)
                });
            }
            Err(e) => c.require(false, || format!("TRS {k}: {e}")),
        }
    }

    let mut worst_grid: f64 = 0.0;
    let mut compare = |c: &mut Check, what: String, val: f64, reference: f64| {
        worst_grid = worst_grid.max((val - reference).abs());
        c.require((val - reference).abs() <= 2e-3, || format!("{what}: relaxation {val} vs grid {reference}"));
    };

    for k in 0..8 {
        let (l1, l2) = (r.random_range(-2.0..-0.5), r.random_range(0.0..2.0));
        let (a, dir) = rotated_2x2(&mut r, l1, l2);
        let lin = &dir * r.random_range(-1.0..1.0);
        let x0 = random_vec(&mut r, 2, 0.3);
        let u: f64 = r.random_range(0.5..2.0);
        let s: f64 = r.random_range(-1.0..1.0);
        let row = (&dir * s, s * dir.dot(&x0) + r.random_range(0.1..0.5));
        let p = build_etrs(&a, &lin, &x0, u, &[row]).unwrap();
        c.require(p.report.holds, || format!("ETRS {k}: condition fails ({})", p.report.reason));
        let (prog, meta) = p.relax().unwrap();
        match solved(&prog) {
            Ok(res) => {
                let bbox: Vec<(f64, f64)> = (0..2).map(|j| (x0[j] - u.sqrt(), x0[j] + u.sqrt())).collect();
                let reference = grid_min(&bbox, |x| p.is_feasible(x, 0.0), |x| p.objective(x));
                compare(&mut c, format!("ETRS {k}"), meta.original_value(res.objective), reference);
            }
            Err(e) => c.require(false, || format!("ETRS {k}: {e}")),
        }
    }

    for k in 0..8 {
        let x0 = random_vec(&mut r, 2, 0.5);
        let r0: f64 = r.random_range(0.5..1.5);
        let th: f64 = r.random_range(0.0..std::f64::consts::PI);
        let dir = v(&[th.cos(), th.sin()]);
        let m = 2 + k % 2;
        let points: Vec<Vector> = (0..m).map(|_| &x0 + &dir * r.random_range(-1.0..1.0)).collect();
        let weights: Vec<f64> = (0..m).map(|_| r.random_range(0.5..2.0)).collect();
        let w = build_wd(&x0, r0, &points, &weights).unwrap();
        c.require(w.report.holds, || format!("WD {k}: condition fails ({})", w.report.reason));
        match solved(&w.program) {
            Ok(res) => {
                let bbox: Vec<(f64, f64)> = (0..2).map(|j| (x0[j] - r0, x0[j] + r0)).collect();
                let reference = -grid_min(&bbox, |x| (x - &x0).norm() <= r0, |x| -w.value(x));
                let val = w.relaxation_value(res.objective);
                compare(&mut c, format!("WD {k}"), val, reference);
                match w.recover(&res.x) {
                    Ok(sol) => c.require((sol.value - val).abs() <= 1e-5, || format!("WD {k}: recovered {} vs {val}", sol.value)),
                    Err(e) => c.require(false, || format!("WD {k}: recovery {e}")),
                }
            }
            Err(e) => c.require(false, || format!("WD {k}: {e}")),
        }
    }

    let mut ttrs_done = 0;
    let mut attempts = 0;
    while ttrs_done < 8 && attempts < 200 {
        attempts += 1;
        let (l1, l2) = (r.random_range(-2.0..1.0), r.random_range(-2.0..2.0));
        let (a, dir) = rotated_2x2(&mut r, l1, l2);
        let b = if attempts % 2 == 0 { random_vec(&mut r, 2, 1.0) } else { &dir * r.random_range(-1.0..1.0) };
        let (alpha, beta): (f64, f64) = (r.random_range(0.2..0.8), r.random_range(1.2..2.0));
        let (prog, meta, rep) = build_ttrs(&a, &b, alpha, beta).unwrap();
        if !rep.holds {
            continue;
        }
        ttrs_done += 1;
        match solved(&prog) {
            Ok(res) => {
                let bbox = vec![(-beta.sqrt(), beta.sqrt()); 2];
                let feasible = |x: &Vector| (alpha..=beta).contains(&x.norm_squared());
                let reference = grid_min(&bbox, feasible, |x| 0.5 * a.quad_form(x) + b.dot(x));
                compare(&mut c, format!("TTRS {ttrs_done}"), meta.original_value(res.objective), reference);
            }
            Err(e) => c.require(false, || format!("TTRS {ttrs_done}: {e}")),
        }
    }
    c.require(ttrs_done == 8, || format!("only {ttrs_done} certified TTRS instances in {attempts} draws"));

    for k in 0..8 {
        let (l1, l2) = (r.random_range(-2.0..-0.2), r.random_range(0.0..2.0));
        let (q, dir) = rotated_2x2(&mut r, l1, l2);
        let mu = &dir * r.random_range(-0.3..0.3);
        let radius: f64 = r.random_range(1.0..1.5);
        let hole = &dir * r.random_range(-0.3..0.3);
        let s: f64 = r.random_range(-1.0..1.0);
        let data = VtrsData {
            q,
            c: random_vec(&mut r, 2, 1.0),
            inner: vec![(mu.clone(), radius)],
            outer: vec![(hole, r.random_range(0.2..0.4))],
            polytope: vec![(&dir * s, s * dir.dot(&mu) + r.random_range(0.3..0.8))],
        };
        let (prog, meta, rep) = build_vtrs(&data).unwrap();
        c.require(rep.holds, || format!("VTRS {k}: condition fails ({})", rep.reason));
        match solved(&prog) {
            Ok(res) => {
                let bbox: Vec<(f64, f64)> = (0..2).map(|j| (mu[j] - radius, mu[j] + radius)).collect();
                let reference = grid_min(&bbox, |x| data.is_feasible(x, 0.0), |x| data.objective(x));
                compare(&mut c, format!("VTRS {k}"), meta.original_value(res.objective), reference);
            }
            Err(e) => c.require(false, || format!("VTRS {k}: {e}")),
        }
    }
    c.note(format!("max TRS error {worst_trs:.2e}, max grid error {worst_grid:.2e}"));
    c
}

fn criterion_7() -> Check {
    let mut c = Check::new();
    let mut r = rng(7);
    let mut feasible = 0;
    for k in 0..20 {
        let n = r.random_range(1..=4);
        let m = r.random_range(1..=3);
        let cost = Vector::from_fn(n, |_, _| f64::from(r.random_range(-5..=5)));
        let a = DMatrix::from_fn(m, n, |_, _| f64::from(r.random_range(-3..=3)));
        let rhs = Vector::from_fn(m, |_, _| f64::from(r.random_range(-1..=4)));
        let inst = ilp_to_uq(&cost, &a, &rhs).unwrap();
        let reduced = binary_max_uq(&inst);
        match (enumerate_binary_ilp(&cost, &a, &rhs), reduced) {
            (Some((best, _)), Ok(g)) => {
                feasible += 1;
                c.require(g.value == best, || format!("ILP {k}: reduced optimum {} vs enumerated {best}", g.value));
            }
            (None, Err(Error::EmptyFeasibleGrid)) => {}
            (e, g) => c.require(false, || format!("ILP {k}: enumeration {e:?} vs reduced {g:?}")),
        }
    }
    c.note(format!("20 ILPs ({feasible} feasible) match exactly"));
    c
}

/// Thirty fixed cone programs: linear programs over boxes, linear objectives
/// over balls cut by halfspaces, norm and least-squares epigraphs, and
/// relaxations of uniform QCQPs.
fn corpus() -> Vec<ConeProgram> {
    let mut r = rng(8);
    let mut out = Vec::new();

    // min t  s.t.  ‖x‖ ≤ t, x = (3, 4)
    let mut p = ConeProgram::new(3);
    p.set_objective(v(&[0.0, 0.0, 1.0]), 0.0).unwrap();
    p.add_eq(v(&[1.0, 0.0, 0.0]), 3.0).unwrap();
    p.add_eq(v(&[0.0, 1.0, 0.0]), 4.0).unwrap();
    let a = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    p.add_soc(a, Vector::zeros(2), v(&[0.0, 0.0, 1.0]), 0.0).unwrap();
    out.push(p);

    for k in 0..7 {
        let n = 2 + k % 5;
        let mut p = ConeProgram::new(n);
        p.set_objective(random_vec(&mut r, n, 1.0), 0.0).unwrap();
        for j in 0..n {
            let e = Vector::from_fn(n, |i, _| if i == j { 1.0 } else { 0.0 });
            p.add_le(e.clone(), 1.0).unwrap();
            p.add_ge(e, -1.0).unwrap();
        }
        let row = random_vec(&mut r, n, 1.0);
        let xhat = random_vec(&mut r, n, 0.5);
        p.add_eq(row.clone(), row.dot(&xhat)).unwrap();
        out.push(p);
    }

    for k in 0..8 {
        let n = 2 + k % 4;
        let mut p = ConeProgram::new(n);
        p.set_objective(random_vec(&mut r, n, 2.0), r.random_range(-1.0..1.0)).unwrap();
        let center = random_vec(&mut r, n, 1.0);
        let radius = r.random_range(0.5..2.0);
        p.add_soc(DMatrix::identity(n, n), -&center, Vector::zeros(n), radius).unwrap();
        for _ in 0..k % 3 + 1 {
            let g = random_vec(&mut r, n, 1.0);
            p.add_le(g.clone(), g.dot(&center) + r.random_range(0.1..0.5)).unwrap();
        }
        out.push(p);
    }

    // min t  s.t.  ‖R x − y‖² ≤ t, x ≥ 0
    for k in 0..4 {
        let n = 2 + k;
        let m = n + 2;
        let rm = DMatrix::from_fn(m, n, |_, _| r.random_range(-1.0..1.0));
        let y = random_vec(&mut r, m, 1.0);
        let mut p = ConeProgram::new(n + 1);
        let mut c = Vector::zeros(n + 1);
        c[n] = 1.0;
        p.set_objective(c, 0.0).unwrap();
        // rotated-cone form ‖(Rx − y, (t − 1)/2)‖ ≤ (t + 1)/2
        let mut a = DMatrix::zeros(m + 1, n + 1);
        a.view_mut((0, 0), (m, n)).copy_from(&rm);
        a[(m, n)] = 0.5;
        let mut b = Vector::zeros(m + 1);
        b.rows_mut(0, m).copy_from(&(-&y));
        b[m] = -0.5;
        let mut w = Vector::zeros(n + 1);
        w[n] = 0.5;
        p.add_soc(a, b, w, 0.5).unwrap();
        for j in 0..n {
            p.add_ge(Vector::from_fn(n + 1, |i, _| if i == j { 1.0 } else { 0.0 }), 0.0).unwrap();
        }
        out.push(p);
    }

    for k in 0..5 {
        let n = 2 + k;
        let inst = random_interior_uq(&mut r, n, n + 2);
        out.push(build_socp_uq(&inst).unwrap().0);
    }
    for k in 0..5 {
        let n = 2 + k % 2;
        let inst = random_low_rank_uq(&mut r, n, 1 + k % (n - 1));
        out.push(build_socp_uq(&inst).unwrap().0);
    }
    assert_eq!(out.len(), 30);
    out
}

fn criterion_8() -> Check {
    let mut c = Check::new();
    let mut worst: f64 = 0.0;
    for (k, prog) in corpus().iter().enumerate() {
        let first = solve(prog, &SolverOptions::default()).unwrap();
        let second = solve(prog, &SolverOptions::default()).unwrap();
        if first.status != SolverStatus::Optimal {
            c.require(false, || format!("program {k}: status {:?}", first.status));
            continue;
        }
        let scale = prog.data_scale().max(1.0 + first.objective.abs());
        let measures = [
            ("complementarity", first.gap.abs()),
            ("primal−dual objective", (first.objective - first.dual_objective).abs()),
            ("primal residual", first.primal_residual.max()),
            ("dual residual", first.dual_residual),
        ];
        for (name, val) in measures {
            worst = worst.max(val / scale);
            c.require(val <= 1e-7 * scale, || format!("program {k}: {name} {val:e} > 1e-7·{scale}"));
        }
        let same = first.iterations == second.iterations
            && first.objective.to_bits() == second.objective.to_bits()
            && first.dual_objective.to_bits() == second.dual_objective.to_bits()
            && first.x.iter().zip(second.x.iter()).all(|(a, b)| a.to_bits() == b.to_bits());
        c.require(same, || format!("program {k}: reruns differ"));
    }
    c.note(format!("30 programs, max scaled residual {worst:.2e}, reruns bit-identical"));
    c
}

fn main() {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("Example 1 golden values", criterion_1),
        ("exactness suite", criterion_2),
        ("approximation ratio suite", criterion_3),
        ("strong duality certificate", criterion_4),
        ("Chebyshev suite", criterion_5),
        ("corollary builders", criterion_6),
        ("ILP reduction", criterion_7),
        ("solver regression corpus", criterion_8),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != i + 1) {
            continue;
        }
        let check = run();
        let verdict = if check.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("criterion {} ({name}): {verdict}  [{}]", i + 1, check.notes.join("; "));
        for f in check.failures.iter().take(10) {
            println!("    {f}");
        }
        if check.failures.len() > 10 {
            println!("    ... {} more", check.failures.len() - 10);
        }
        failed += usize::from(!check.failures.is_empty());
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
