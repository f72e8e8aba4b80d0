//! Homogeneous self-dual interior-point method with Nesterov–Todd scaling and
//! Mehrotra predictor-corrector steps.
//!
//! The embedding solved is
//!
//! ```text
//! 0 = Aᵀy + Gᵀz + cτ,   0 = −Ax + bτ,   s = hτ − Gx,   κ = −cᵀx − bᵀy − hᵀz
//! ```
//!
//! with `s, z ∈ K` and `τ, κ ≥ 0`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::cones::{ConeLayout, NtScaling};
use super::kkt::KktSystem;
use super::program::{ConeProgram, Violation};
use crate::error::Result;
use crate::linalg::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub feas_tol: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
    pub max_iter: usize,
    pub static_reg: f64,
    pub refine_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            feas_tol: 1e-8,
            abs_gap: 1e-8,
            rel_gap: 1e-8,
            max_iter: 200,
            static_reg: 1e-10,
            refine_steps: 3,
        }
    }
}

/// Objective value beyond which a still-feasible iterate is declared unbounded.
pub const UNBOUNDED_THRESHOLD: f64 = 1e12;

/// Tolerance accepted when the iteration stalls before reaching the
/// requested accuracy.
const STALL_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// `(y, z)` with `Eᵀy + Gᵀz ≈ 0`, `z` in the dual cone and `fᵀy + hᵀz = −1`.
    PrimalInfeasible { y: Vector, z: Vector },
    /// Improving ray `x` with `Ex ≈ 0`, `−Gx` in the cone and `cᵀx = −1`.
    Unbounded { ray: Vector },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub status: SolverStatus,
    pub x: Vector,
    /// `cᵀx + offset`; `+∞` when infeasible, `−∞` when unbounded.
    pub objective: f64,
    pub dual_objective: f64,
    pub ineq_duals: Vector,
    pub eq_duals: Vector,
    pub soc_duals: Vec<Vector>,
    /// Violations of the original constraints at `x`.
    pub primal_residual: Violation,
    /// `‖c + Eᵀy + Gᵀz‖∞`
    pub dual_residual: f64,
    /// Complementarity `sᵀz`.
    pub gap: f64,
    pub iterations: usize,
    pub certificate: Option<Certificate>,
}

impl SolverResult {
    pub fn is_optimal(&self) -> bool {
        self.status == SolverStatus::Optimal
    }
}

struct StandardForm {
    c: Vector,
    a: DMatrix<f64>,
    b: Vector,
    g: DMatrix<f64>,
    h: Vector,
    layout: ConeLayout,
}

fn standard_form(prog: &ConeProgram) -> StandardForm {
    let n = prog.num_vars();
    let l = prog.ineq_rows().len();
    let soc: Vec<usize> = prog.soc_blocks().iter().map(|b| b.dim()).collect();
    let m = l + soc.iter().sum::<usize>();
    let mut g = DMatrix::zeros(m, n);
    let mut h = Vector::zeros(m);
    for (i, (row, rhs)) in prog.ineq_rows().iter().zip(prog.ineq_rhs()).enumerate() {
        g.set_row(i, &row.transpose());
        h[i] = *rhs;
    }
    let mut off = l;
    for blk in prog.soc_blocks() {
        g.set_row(off, &(-&blk.c).transpose());
        h[off] = blk.d;
        for r in 0..blk.a.nrows() {
            for j in 0..n {
                g[(off + 1 + r, j)] = -blk.a[(r, j)];
            }
            h[off + 1 + r] = blk.b[r];
        }
        off += blk.dim();
    }
    let p = prog.eq_rows().len();
    let mut a = DMatrix::zeros(p, n);
    for (i, row) in prog.eq_rows().iter().enumerate() {
        a.set_row(i, &row.transpose());
    }
    StandardForm {
        c: prog.objective().clone(),
        a,
        b: Vector::from_row_slice(prog.eq_rhs()),
        g,
        h,
        layout: ConeLayout { linear: l, soc },
    }
}

#[derive(Clone)]
struct Iterate {
    x: Vector,
    y: Vector,
    z: Vector,
    s: Vector,
    tau: f64,
    kappa: f64,
}

#[derive(Debug, Clone, Copy)]
struct Metrics {
    pres: f64,
    dres: f64,
    gap: f64,
    relgap: f64,
    pcost: f64,

}

impl Metrics {
    fn merit(&self) -> f64 {
        let g = if self.relgap.is_finite() {
            self.gap.min(self.relgap)
        } else {
            self.gap
        };
        self.pres.max(self.dres).max(g)
    }
}

/// Solves a cone program. Deterministic for fixed inputs and options.
pub fn solve(prog: &ConeProgram, opts: &SolverOptions) -> Result<SolverResult> {
    prog.validate()?;
    let sf = standard_form(prog);
    if sf.g.nrows() == 0 && sf.a.nrows() == 0 {
        return Ok(solve_unconstrained(prog));
    }
    Ok(Ipm::new(&sf, opts).run(prog))
}

fn solve_unconstrained(prog: &ConeProgram) -> SolverResult {
    let n = prog.num_vars();
    let c = prog.objective();
    let base = SolverResult {
        status: SolverStatus::Optimal,
        x: Vector::zeros(n),
        objective: prog.offset(),
        dual_objective: prog.offset(),
        ineq_duals: Vector::zeros(0),
        eq_duals: Vector::zeros(0),
        soc_duals: Vec::new(),
        primal_residual: Violation::default(),
        dual_residual: c.amax(),
        gap: 0.0,
        iterations: 0,
        certificate: None,
    };
    if c.amax() == 0.0 {
        return base;
    }
    SolverResult {
        status: SolverStatus::Unbounded,
        objective: f64::NEG_INFINITY,
        certificate: Some(Certificate::Unbounded {
            ray: -c / c.norm_squared(),
        }),
        ..base
    }
}

struct Ipm<'a> {
    sf: &'a StandardForm,
    opts: &'a SolverOptions,
    kkt: KktSystem<'a>,
    resx0: f64,
    resy0: f64,
    resz0: f64,
}

impl<'a> Ipm<'a> {
    fn new(sf: &'a StandardForm, opts: &'a SolverOptions) -> Self {
        Ipm {
            sf,
            opts,
            kkt: KktSystem::new(&sf.a, &sf.g, opts.static_reg, opts.refine_steps),
            resx0: sf.c.norm().max(1.0),
            resy0: sf.b.norm().max(1.0),
            resz0: sf.h.norm().max(1.0),
        }
    }

    fn shift_into_cone(&self, u: &mut Vector) {
        let layout = &self.sf.layout;
        let alpha = -layout.min_eig(u);
        if alpha >= 0.0 {
            *u += layout.identity() * (1.0 + alpha);
        }
    }

    fn initial_point(&self) -> Iterate {
        let sf = self.sf;
        let (n, p, m) = (sf.c.len(), sf.b.len(), sf.h.len());
        let w = NtScaling::identity(&sf.layout);
        let f = self.kkt.factor(&w);
        let (x, _, zp) = self.kkt.solve(&f, &Vector::zeros(n), &sf.b, &sf.h);
        let mut s = -zp;
        self.shift_into_cone(&mut s);
        let (_, y, mut z) = self.kkt.solve(&f, &(-&sf.c), &Vector::zeros(p), &Vector::zeros(m));
        self.shift_into_cone(&mut z);
        Iterate {
            x,
            y,
            z,
            s,
            tau: 1.0,
            kappa: 1.0,
        }
    }

    fn residuals(&self, it: &Iterate) -> (Vector, Vector, Vector, f64) {
        let sf = self.sf;
        let rx = sf.a.tr_mul(&it.y) + sf.g.tr_mul(&it.z) + &sf.c * it.tau;
        let ry = -(&sf.a * &it.x) + &sf.b * it.tau;
        let rz = &it.s + &sf.g * &it.x - &sf.h * it.tau;
        let rt = it.kappa + sf.c.dot(&it.x) + sf.b.dot(&it.y) + sf.h.dot(&it.z);
        (rx, ry, rz, rt)
    }

    fn metrics(&self, it: &Iterate, rx: &Vector, ry: &Vector, rz: &Vector) -> Metrics {
        let sf = self.sf;
        let tau = it.tau;
        let pres = (ry.norm() / self.resy0).max(rz.norm() / self.resz0) / tau;
        let dres = rx.norm() / self.resx0 / tau;
        let gap = it.s.dot(&it.z) / (tau * tau);
        let pcost = sf.c.dot(&it.x) / tau;
        let dcost = -(sf.b.dot(&it.y) + sf.h.dot(&it.z)) / tau;
        let relgap = if pcost < 0.0 {
            gap / -pcost
        } else if dcost > 0.0 {
            gap / dcost
        } else {
            f64::NAN
        };
        Metrics {
            pres,
            dres,
            gap,
            relgap,
            pcost,

        }
    }

    fn converged(&self, mt: &Metrics, feas: f64, abs: f64, rel: f64) -> bool {
        mt.pres < feas && mt.dres < feas && (mt.gap < abs || (mt.relgap.is_finite() && mt.relgap < rel))
    }

    fn infeasibility(&self, it: &Iterate) -> Option<(SolverStatus, Certificate)> {
        let sf = self.sf;
        if it.tau >= it.kappa {
            return None;
        }
        let feas = self.opts.feas_tol;
        let hz_by = sf.h.dot(&it.z) + sf.b.dot(&it.y);
        if hz_by < 0.0 {
            let r = (sf.a.tr_mul(&it.y) + sf.g.tr_mul(&it.z)).norm() / self.resx0;
            if r / -hz_by < feas {
                let scale = -1.0 / hz_by;
                return Some((
                    SolverStatus::Infeasible,
                    Certificate::PrimalInfeasible {
                        y: &it.y * scale,
                        z: &it.z * scale,
                    },
                ));
            }
        }
        let cx = sf.c.dot(&it.x);
        if cx < 0.0 {
            let r = ((&sf.a * &it.x).norm() / self.resy0)
                .max((&it.s + &sf.g * &it.x).norm() / self.resz0);
            if r / -cx < feas {
                return Some((
                    SolverStatus::Unbounded,
                    Certificate::Unbounded {
                        ray: &it.x * (-1.0 / cx),
                    },
                ));
            }
        }
        None
    }

    fn run(&self, prog: &ConeProgram) -> SolverResult {
        let sf = self.sf;
        let layout = &sf.layout;
        let nu = layout.degree() as f64;
        let e = layout.identity();
        let mut it = self.initial_point();
        let mut best: Option<(f64, Iterate)> = None;
        let mut iterations = 0;

        let (status, final_it, cert) = loop {
            let (rx, ry, rz, rt) = self.residuals(&it);
            let mt = self.metrics(&it, &rx, &ry, &rz);
            if !mt.merit().is_finite() {
                break (SolverStatus::MaxIter, None, None);
            }
            if best.as_ref().is_none_or(|(m, _)| mt.merit() < *m) {
                best = Some((mt.merit(), it.clone()));
            }
            if self.converged(&mt, self.opts.feas_tol, self.opts.abs_gap, self.opts.rel_gap) {
                break (SolverStatus::Optimal, Some(it.clone()), None);
            }
            if let Some((st, c)) = self.infeasibility(&it) {
                break (st, Some(it.clone()), Some(c));
            }
            if mt.pcost < -UNBOUNDED_THRESHOLD && mt.pres < self.opts.feas_tol {
                let ray = &it.x / it.tau;
                let scale = -1.0 / sf.c.dot(&ray);
                break (
                    SolverStatus::Unbounded,
                    Some(it.clone()),
                    Some(Certificate::Unbounded { ray: ray * scale }),
                );
            }
            if iterations >= self.opts.max_iter {
                break (SolverStatus::MaxIter, None, None);
            }

            let Some(w) = NtScaling::new(layout, &it.s, &it.z) else {
                break (SolverStatus::MaxIter, None, None);
            };
            let lambda = w.mul(&it.z);
            let f = self.kkt.factor(&w);
            let (x1, y1, z1) = self.kkt.solve(&f, &(-&sf.c), &sf.b, &sf.h);
            let q1 = sf.c.dot(&x1) + sf.b.dot(&y1) + sf.h.dot(&z1);

            let direction = |ds_target: &Vector, dk_target: f64, eta: f64| {
                let wl = w.mul(&layout.jordan_div(&lambda, ds_target));
                let (x0, y0, z0) =
                    self.kkt
                        .solve(&f, &(-&rx * eta), &(&ry * eta), &(-&rz * eta - &wl));
                let q0 = sf.c.dot(&x0) + sf.b.dot(&y0) + sf.h.dot(&z0);
                let dtau = (-eta * rt - q0 - dk_target / it.tau) / (q1 - it.kappa / it.tau);
                let dx = x0 + &x1 * dtau;
                let dy = y0 + &y1 * dtau;
                let dz = z0 + &z1 * dtau;
                let ds = &wl - w.mul(&w.mul(&dz));
                let dkappa = (dk_target - it.kappa * dtau) / it.tau;
                (dx, dy, dz, ds, dtau, dkappa)
            };
            let step_len = |dz: &Vector, ds: &Vector, dtau: f64, dkappa: f64| {
                let mut a = layout.max_step(&it.s, ds).min(layout.max_step(&it.z, dz));
                if dtau < 0.0 {
                    a = a.min(-it.tau / dtau);
                }
                if dkappa < 0.0 {
                    a = a.min(-it.kappa / dkappa);
                }
                a
            };

            // predictor
            let ds_aff = -layout.jordan(&lambda, &lambda);
            let dk_aff = -it.tau * it.kappa;
            let (_, _, dz_a, ds_a, dtau_a, dkappa_a) = direction(&ds_aff, dk_aff, 1.0);
            let alpha_aff = step_len(&dz_a, &ds_a, dtau_a, dkappa_a).min(1.0);
            let sigma = (1.0 - alpha_aff).powi(3).clamp(0.0, 1.0);
            let mu = (it.s.dot(&it.z) + it.tau * it.kappa) / (nu + 1.0);

            // corrector
            let ds_c = &ds_aff - layout.jordan(&w.inv_mul(&ds_a), &w.mul(&dz_a)) + &e * (sigma * mu);
            let dk_c = dk_aff - dtau_a * dkappa_a + sigma * mu;
            let (dx, dy, dz, ds, dtau, dkappa) = direction(&ds_c, dk_c, 1.0 - sigma);
            let alpha = (0.99 * step_len(&dz, &ds, dtau, dkappa)).min(1.0);
            iterations += 1;
            if !(alpha > 1e-12) {
                break (SolverStatus::MaxIter, None, None);
            }
            it.x += dx * alpha;
            it.y += dy * alpha;
            it.z += dz * alpha;
            it.s += ds * alpha;
            it.tau += dtau * alpha;
            it.kappa += dkappa * alpha;
        };

        let (status, it, cert) = match (status, final_it) {
            (SolverStatus::MaxIter, _) => {
                let it = best.map(|(_, b)| b).unwrap_or(it);
                let (rx, ry, rz, _) = self.residuals(&it);
                let mt = self.metrics(&it, &rx, &ry, &rz);
                if self.converged(&mt, STALL_TOL, STALL_TOL, STALL_TOL) {
                    (SolverStatus::Optimal, it, None)
                } else {
                    (SolverStatus::MaxIter, it, None)
                }
            }
            (st, Some(fi)) => (st, fi, cert),
            (st, None) => (st, it, cert),
        };
        self.assemble(prog, status, &it, cert, iterations)
    }

    fn assemble(
        &self,
        prog: &ConeProgram,
        status: SolverStatus,
        it: &Iterate,
        cert: Option<Certificate>,
        iterations: usize,
    ) -> SolverResult {
        let sf = self.sf;
        let layout = &sf.layout;
        let tau = match status {
            SolverStatus::Infeasible | SolverStatus::Unbounded => it.tau.max(f64::MIN_POSITIVE),
            _ => it.tau,
        };
        let x = &it.x / tau;
        let y = &it.y / tau;
        let z = &it.z / tau;
        let s = &it.s / tau;
        let soc_duals = layout
            .soc_ranges()
            .into_iter()
            .map(|r| z.rows(r.start, r.len()).into_owned())
            .collect();
        let dual_residual = (sf.a.tr_mul(&y) + sf.g.tr_mul(&z) + &sf.c).amax();
        let (objective, dual_objective) = match status {
            SolverStatus::Infeasible => (f64::INFINITY, f64::INFINITY),
            SolverStatus::Unbounded => (f64::NEG_INFINITY, f64::NEG_INFINITY),
            _ => (
                prog.eval_objective(&x),
                -(sf.b.dot(&y) + sf.h.dot(&z)) + prog.offset(),
            ),
        };
        SolverResult {
            status,
            primal_residual: prog.violation(&x),
            x,
            objective,
            dual_objective,
            ineq_duals: z.rows(0, layout.linear).into_owned(),
            eq_duals: y,
            soc_duals,
            dual_residual,
            gap: s.dot(&z),
            iterations,
            certificate: cert,
        }
    }
}
