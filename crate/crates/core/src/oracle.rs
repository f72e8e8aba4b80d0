//! Brute-force reference values for small instances. None of this is used on
//! the solving path; it exists so results can be checked against something
//! that does not share code with the solver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, SymMatrix, Vector};
use crate::model::{BallIntersection, UqInstance};

/// Largest dimension the grid oracles accept.
pub const MAX_GRID_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridResult {
    pub value: f64,
    pub argmax: Vector,
    /// Spacing of the finest grid evaluated.
    pub h: f64,
    pub evaluated: usize,
    /// Upper bound on `‖∇f‖` over the box, when known.
    pub lipschitz: Option<f64>,
}

/// Number of best coarse points refined at each zoom level.
const ZOOM_KEEP: usize = 8;

/// Maximises `objective` over the feasible points of a regular grid with
/// spacing `h` on `bbox`, then refines `zoom_levels` times: each level
/// re-grids a cube of half-width `2h` around the best few points at spacing
/// `h/10`. Points are generated as `lo + k·h` so sweeps are reproducible.
pub fn grid_maximize(
    bbox: &[(f64, f64)],
    h: f64,
    zoom_levels: usize,
    feasible: impl Fn(&Vector) -> bool,
    objective: impl Fn(&Vector) -> f64,
) -> Result<GridResult> {
    let n = bbox.len();
    if n == 0 || n > MAX_GRID_DIM {
        return Err(Error::InvalidInput(format!(
            "grid oracle supports 1 ≤ n ≤ {MAX_GRID_DIM}, got {n}"
        )));
    }
    if !(h > 0.0) || bbox.iter().any(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
        return Err(Error::InvalidInput("grid box and spacing must be finite with h > 0".into()));
    }
    let mut evaluated = 0;
    let mut best = sweep(bbox, h, &feasible, &objective, &mut evaluated);
    if best.is_empty() {
        return Err(Error::EmptyFeasibleGrid);
    }
    let mut step = h;
    for _ in 0..zoom_levels {
        let fine = step / 10.0;
        let mut next = best.clone();
        for (_, x) in &best {
            let local: Vec<(f64, f64)> = (0..n).map(|k| (x[k] - 2.0 * step, x[k] + 2.0 * step)).collect();
            next.extend(sweep(&local, fine, &feasible, &objective, &mut evaluated));
        }
        best = top_k(next);
        step = fine;
    }
    let (value, argmax) = best.swap_remove(0);
    Ok(GridResult {
        value,
        argmax,
        h: step,
        evaluated,
        lipschitz: None,
    })
}

fn sweep(
    bbox: &[(f64, f64)],
    h: f64,
    feasible: &impl Fn(&Vector) -> bool,
    objective: &impl Fn(&Vector) -> f64,
    evaluated: &mut usize,
) -> Vec<(f64, Vector)> {
    let n = bbox.len();
    let counts: Vec<usize> = bbox.iter().map(|(lo, hi)| ((hi - lo) / h).floor() as usize + 1).collect();
    let total: usize = counts.iter().product();
    let mut out = Vec::new();
    let mut x = Vector::zeros(n);
    for idx in 0..total {
        let mut rem = idx;
        for k in 0..n {
            x[k] = bbox[k].0 + (rem % counts[k]) as f64 * h;
            rem /= counts[k];
        }
        *evaluated += 1;
        if feasible(&x) {
            out.push((objective(&x), x.clone()));
            if out.len() > 4 * ZOOM_KEEP {
                out = top_k(out);
            }
        }
    }
    top_k(out)
}

/// Best `ZOOM_KEEP` entries, ties broken by traversal order.
fn top_k(mut v: Vec<(f64, Vector)>) -> Vec<(f64, Vector)> {
    v.sort_by(|a, b| b.0.total_cmp(&a.0));
    v.truncate(ZOOM_KEEP);
    v
}

/// Bounding box of the feasible set of a uniform QCQP with `Q ≻ 0`: each row
/// with a finite upper bound is the ellipsoid
/// `(x − c)ᵀQ(x − c) ≤ u − d + bᵀQ⁻¹b` with `c = −Q⁻¹b`; boxes of all such
/// rows are intersected, then inflated by 10%.
pub fn infer_box(inst: &UqInstance) -> Result<Vec<(f64, f64)>> {
    let n = inst.n();
    let unbounded = || Error::UnboundedBox("no ellipsoidal row bounds the feasible set".into());
    let qinv = match inst.q().to_dense().cholesky() {
        Some(ch) => ch.inverse(),
        None => return Err(Error::UnboundedBox("Q is not positive definite".into())),
    };
    let mut bbox: Option<Vec<(f64, f64)>> = None;
    for i in 1..=inst.p() {
        let Some(u) = inst.bound(i).upper else { continue };
        let b = inst.b(i);
        let c = -(&qinv * b);
        let rho = u - inst.d(i) + b.dot(&(&qinv * b));
        if rho < 0.0 {
            return Err(Error::EmptyFeasibleGrid);
        }
        let rowbox: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let w = (rho * qinv[(k, k)]).sqrt();
                (c[k] - w, c[k] + w)
            })
            .collect();
        bbox = Some(match bbox {
            None => rowbox,
            Some(prev) => prev
                .iter()
                .zip(&rowbox)
                .map(|(a, b)| (a.0.max(b.0), a.1.min(b.1)))
                .collect(),
        });
    }
    let bbox = bbox.ok_or_else(unbounded)?;
    if bbox.iter().any(|(lo, hi)| lo > hi) {
        return Err(Error::EmptyFeasibleGrid);
    }
    Ok(bbox
        .into_iter()
        .map(|(lo, hi)| {
            let mid = 0.5 * (lo + hi);
            let half = 0.55 * (hi - lo);
            (mid - half, mid + half)
        })
        .collect())
}

/// Grid maximum of `f₀` over the feasible set (feasibility tolerance `1e-12`).
/// The box is inferred with [`infer_box`] when not given.
pub fn grid_max_uq(inst: &UqInstance, bbox: Option<&[(f64, f64)]>, h: f64) -> Result<GridResult> {
    grid_max_uq_refined(inst, bbox, h, 0)
}

/// [`grid_max_uq`] followed by `zoom_levels` local refinements.
pub fn grid_max_uq_refined(
    inst: &UqInstance,
    bbox: Option<&[(f64, f64)]>,
    h: f64,
    zoom_levels: usize,
) -> Result<GridResult> {
    let bbox = match bbox {
        Some(b) => b.to_vec(),
        None => infer_box(inst)?,
    };
    if bbox.len() != inst.n() {
        return Err(Error::InvalidInput(format!(
            "box has {} axes, instance has n = {}",
            bbox.len(),
            inst.n()
        )));
    }
    let mut res = grid_maximize(&bbox, h, zoom_levels, |x| inst.is_feasible(x, 1e-12), |x| inst.objective(x))?;
    let rmax = bbox
        .iter()
        .map(|(lo, hi)| lo.abs().max(hi.abs()).powi(2))
        .sum::<f64>()
        .sqrt();
    let qnorm = linalg::sym_eig(inst.q())?.max_abs();
    res.lipschitz = Some(2.0 * qnorm * rmax + 2.0 * inst.b(0).norm());
    Ok(res)
}

/// Maximum of `f₀` over the feasible set of a uniform QCQP with `Q ≻ 0` and
/// `n ≤ 3`, sampled on the boundary.
///
/// `f₀` is convex, so its maximum over the compact feasible set lies on the
/// boundary, which is made of the surfaces `f_i = l_i` and `f_i = u_i`. In
/// coordinates `y = Q^{1/2}x` each surface is a sphere, and two surfaces meet
/// where a linear function is constant. Every face is therefore a sphere cut
/// by an affine subspace; each is sampled with arc spacing `delta` and the
/// feasible samples are evaluated. Faces of dimension zero are exact.
pub fn boundary_max_uq(inst: &UqInstance, delta: f64) -> Result<GridResult> {
    let n = inst.n();
    if n == 0 || n > MAX_GRID_DIM {
        return Err(Error::InvalidInput(format!(
            "boundary oracle supports 1 ≤ n ≤ {MAX_GRID_DIM}, got {n}"
        )));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidInput("arc spacing must be positive".into()));
    }
    if (1..=inst.p()).all(|i| inst.bound(i).upper.is_none()) {
        return Err(Error::UnboundedBox("no row bounds the feasible set from above".into()));
    }
    let (norm, map) = inst.normalize_uq()?;
    // surfaces |y|² + 2b_iᵀy = β
    let mut surfaces: Vec<(usize, f64)> = Vec::new();
    for i in 1..=norm.p() {
        let bd = norm.bound(i);
        for beta in [bd.lower, bd.upper].into_iter().flatten() {
            if !surfaces.contains(&(i, beta)) {
                surfaces.push((i, beta));
            }
        }
    }
    let tol = 1e-9 * (1.0 + inst.scale());
    let mut best: Option<(f64, Vector)> = None;
    let mut evaluated = 0usize;
    let mut consider = |y: &Vector| {
        evaluated += 1;
        let x = map.to_original(y);
        if !inst.is_feasible(&x, tol) {
            return;
        }
        let v = inst.objective(&x);
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, x));
        }
    };
    for (si, &(i, beta)) in surfaces.iter().enumerate() {
        let center = -norm.b(i);
        let rho2 = beta + norm.b(i).norm_squared();
        if rho2 < 0.0 {
            continue;
        }
        let others: Vec<(usize, f64)> = surfaces
            .iter()
            .enumerate()
            .filter(|&(sk, &(k, _))| sk != si && k != i)
            .map(|(_, &s)| s)
            .collect();
        for cuts in subsets_up_to(&others, n - 1) {
            // f_k − f_i = 2(b_k − b_i)ᵀy = β_k − β
            let rows: Vec<Vector> = cuts.iter().map(|&(k, _)| (norm.b(k) - norm.b(i)) * 2.0).collect();
            let rhs: Vec<f64> = cuts.iter().map(|&(_, bk)| bk - beta).collect();
            if rows.iter().any(|r| r.norm() < 1e-12) {
                continue;
            }
            if !rows.is_empty() && linalg::numerical_rank(&rows, 1e-10)? < rows.len() {
                continue;
            }
            let Some((foot, basis)) = affine_section(&rows, &rhs, &center) else { continue };
            let r2 = rho2 - (&foot - &center).norm_squared();
            if r2 < 0.0 {
                continue;
            }
            sample_sphere(&foot, r2.sqrt(), &basis, delta, &mut consider);
        }
    }
    let (value, argmax) = best.ok_or(Error::EmptyFeasibleGrid)?;
    Ok(GridResult {
        value,
        argmax,
        h: delta,
        evaluated,
        lipschitz: None,
    })
}

/// Subsets of size `0..=k`, at most one per row index.
fn subsets_up_to(items: &[(usize, f64)], k: usize) -> Vec<Vec<(usize, f64)>> {
    let mut out = vec![Vec::new()];
    for &it in items {
        let grown: Vec<Vec<(usize, f64)>> = out
            .iter()
            .filter(|s| s.len() < k && s.iter().all(|&(r, _)| r != it.0))
            .map(|s| {
                let mut t = s.clone();
                t.push(it);
                t
            })
            .collect();
        out.extend(grown);
    }
    out
}

/// Point of `{y : A y = r}` closest to `c`, and an orthonormal basis of the
/// null space of `A`.
fn affine_section(rows: &[Vector], rhs: &[f64], c: &Vector) -> Option<(Vector, Vec<Vector>)> {
    let n = c.len();
    if rows.is_empty() {
        let basis = (0..n).map(|k| Vector::from_fn(n, |j, _| if j == k { 1.0 } else { 0.0 })).collect();
        return Some((c.clone(), basis));
    }
    let m = rows.len();
    let a = nalgebra::DMatrix::from_fn(m, n, |r, j| rows[r][j]);
    let resid = Vector::from_fn(m, |r, _| rhs[r] - rows[r].dot(c));
    let gram = &a * a.transpose();
    let w = gram.lu().solve(&resid)?;
    let foot = c + a.transpose() * w;
    let basis = linalg::SubspaceBasis::complement_of(n, rows, 1e-10).ok()?;
    Some((foot, basis.columns().to_vec()))
}

/// Calls `f` on points of the sphere of radius `r` around `c` inside
/// `span(basis)`, spaced about `delta` apart.
fn sample_sphere(c: &Vector, r: f64, basis: &[Vector], delta: f64, f: &mut impl FnMut(&Vector)) {
    match basis.len() {
        0 => f(c),
        1 => {
            f(&(c + &basis[0] * r));
            f(&(c - &basis[0] * r));
        }
        2 => {
            let steps = ((2.0 * std::f64::consts::PI * r / delta).ceil() as usize).max(8);
            for k in 0..steps {
                let th = 2.0 * std::f64::consts::PI * k as f64 / steps as f64;
                f(&(c + &basis[0] * (r * th.cos()) + &basis[1] * (r * th.sin())));
            }
        }
        _ => {
            let rings = ((std::f64::consts::PI * r / delta).ceil() as usize).max(4);
            for a in 0..=rings {
                let th = std::f64::consts::PI * a as f64 / rings as f64;
                let ring_r = r * th.sin();
                let steps = ((2.0 * std::f64::consts::PI * ring_r / delta).ceil() as usize).max(1);
                for k in 0..steps {
                    let ph = 2.0 * std::f64::consts::PI * k as f64 / steps as f64;
                    let p = c
                        + &basis[0] * (r * th.cos())
                        + &basis[1] * (ring_r * ph.cos())
                        + &basis[2] * (ring_r * ph.sin());
                    f(&p);
                }
            }
        }
    }
}

/// Whether the rows pin the feasible set inside `{0,1}ⁿ`: `Q = I`, an
/// equality `Σx_j² − x_j = 0`, and for every `j` a row reading
/// `0 ≤ xᵀx − eᵀx + x_j ≤ 1`. Together these force each `x_j(x_j − 1)` to be
/// zero. This is the shape `ilp_to_uq` produces.
pub fn is_binary_encoded(inst: &UqInstance) -> bool {
    let n = inst.n();
    if *inst.q() != SymMatrix::identity(n) {
        return false;
    }
    let e = Vector::from_element(n, 1.0);
    let rows = || (1..=inst.p()).filter(|&i| inst.d(i) == 0.0);
    let has_equality = rows().any(|i| inst.bound(i).is_equality() && inst.bound(i).lower == Some(0.0) && *inst.b(i) == &e * -0.5);
    has_equality
        && (0..n).all(|j| {
            let mut target = &e * -0.5;
            target[j] += 0.5;
            rows().any(|i| {
                let bd = inst.bound(i);
                *inst.b(i) == target && bd.lower_or_neg_inf() >= 0.0 && bd.upper_or_inf() <= 1.0
            })
        })
}

/// Largest dimension [`binary_max_uq`] enumerates.
pub const MAX_BINARY_DIM: usize = 20;

/// Maximum of `f₀` over the feasible vertices of `{0,1}ⁿ`, checked with exact
/// feasibility. This is the whole feasible set of an instance produced by
/// `ilp_to_uq`.
pub fn binary_max_uq(inst: &UqInstance) -> Result<GridResult> {
    let n = inst.n();
    if n > MAX_BINARY_DIM {
        return Err(Error::InvalidInput(format!(
            "vertex enumeration supports n ≤ {MAX_BINARY_DIM}, got {n}"
        )));
    }
    let mut best: Option<(f64, Vector)> = None;
    for mask in 0u32..(1 << n) {
        let x = Vector::from_fn(n, |k, _| f64::from((mask >> k) & 1));
        if !inst.is_feasible(&x, 0.0) {
            continue;
        }
        let v = inst.objective(&x);
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, x));
        }
    }
    let (value, argmax) = best.ok_or(Error::EmptyFeasibleGrid)?;
    Ok(GridResult {
        value,
        argmax,
        h: 1.0,
        evaluated: 1 << n,
        lipschitz: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinMaxResult {
    pub value: f64,
    pub center: Vector,
    pub boundary_points: usize,
}

/// `min_z max_{x∈Ω} ‖x − z‖²` for `n ≤ 2`. The inner maximum of a convex
/// function is attained on the boundary of `Ω`, so `Ω` is represented by the
/// points of each sphere `‖x − a_i‖ = r_i` (arc spacing `h`) that lie in every
/// other ball, plus the pairwise corners. The outer minimum over `z` is then
/// the smallest ball enclosing those points.
pub fn grid_minmax_cc(balls: &BallIntersection, h: f64) -> Result<MinMaxResult> {
    let n = balls.n();
    if n > 2 {
        return Err(Error::InvalidInput(format!("min-max oracle supports n ≤ 2, got {n}")));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidInput("h must be positive".into()));
    }
    let tol = 1e-12;
    let mut pts: Vec<Vector> = Vec::new();
    for (a, &r) in balls.centers().iter().zip(balls.radii()) {
        if n == 1 {
            for s in [-1.0, 1.0] {
                let x = Vector::from_element(1, a[0] + s * r);
                if balls.contains(&x, tol) {
                    pts.push(x);
                }
            }
        } else {
            let m = ((std::f64::consts::TAU * r / h).ceil() as usize).max(8);
            for k in 0..m {
                let th = k as f64 * std::f64::consts::TAU / m as f64;
                let x = Vector::from_row_slice(&[a[0] + r * th.cos(), a[1] + r * th.sin()]);
                if balls.contains(&x, tol) {
                    pts.push(x);
                }
            }
        }
    }
    if n == 2 {
        pts.extend(
            circle_intersections(balls)
                .into_iter()
                .filter(|x| balls.contains(x, 1e-9)),
        );
    }
    if pts.is_empty() {
        return Err(Error::EmptyFeasibleGrid);
    }
    let (center, value) = enclosing_ball(pts.clone());
    Ok(MinMaxResult {
        value,
        center,
        boundary_points: pts.len(),
    })
}

/// Smallest enclosing ball of points in `R¹` or `R²` (incremental
/// move-to-front construction over a fixed shuffle). Returns the center and
/// squared radius.
fn enclosing_ball(mut pts: Vec<Vector>) -> (Vector, f64) {
    let n = pts[0].len();
    if n == 1 {
        let lo = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        return (Vector::from_element(1, 0.5 * (lo + hi)), (0.25 * (hi - lo) * (hi - lo)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for i in (1..pts.len()).rev() {
        pts.swap(i, rng.random_range(0..=i));
    }
    let scale = pts.iter().map(|p| p.norm_squared()).fold(1.0, f64::max);
    let eps = 1e-12 * scale;
    let outside = |c: &Vector, r2: f64, p: &Vector| (p - c).norm_squared() > r2 + eps;
    let mut c = pts[0].clone();
    let mut r2 = 0.0;
    for i in 1..pts.len() {
        if !outside(&c, r2, &pts[i]) {
            continue;
        }
        c = pts[i].clone();
        r2 = 0.0;
        for j in 0..i {
            if !outside(&c, r2, &pts[j]) {
                continue;
            }
            c = (&pts[i] + &pts[j]) * 0.5;
            r2 = (&pts[i] - &c).norm_squared();
            for k in 0..j {
                if !outside(&c, r2, &pts[k]) {
                    continue;
                }
                if let Some(cc) = circumcenter(&pts[i], &pts[j], &pts[k]) {
                    r2 = (&pts[i] - &cc).norm_squared();
                    c = cc;
                }
            }
        }
    }
    (c, r2)
}

/// Pairwise intersection points of the boundary circles (the corners of `Ω`).
fn circle_intersections(balls: &BallIntersection) -> Vec<Vector> {
    let mut out = Vec::new();
    let (cs, rs) = (balls.centers(), balls.radii());
    for i in 0..cs.len() {
        for j in i + 1..cs.len() {
            let e = &cs[j] - &cs[i];
            let d = e.norm();
            if d == 0.0 || d > rs[i] + rs[j] || d < (rs[i] - rs[j]).abs() {
                continue;
            }
            let along = (d * d + rs[i] * rs[i] - rs[j] * rs[j]) / (2.0 * d);
            let off = (rs[i] * rs[i] - along * along).max(0.0).sqrt();
            let u = &e / d;
            let perp = Vector::from_row_slice(&[-u[1], u[0]]);
            let mid = &cs[i] + &u * along;
            out.push(&mid + &perp * off);
            out.push(&mid - &perp * off);
        }
    }
    out
}

fn circumcenter(a: &Vector, b: &Vector, c: &Vector) -> Option<Vector> {
    let (bx, by) = (b[0] - a[0], b[1] - a[1]);
    let (cx, cy) = (c[0] - a[0], c[1] - a[1]);
    let d = 2.0 * (bx * cy - by * cx);
    if d.abs() < 1e-300 {
        return None;
    }
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    Some(Vector::from_row_slice(&[
        a[0] + (cy * b2 - by * c2) / d,
        a[1] + (bx * c2 - cx * b2) / d,
    ]))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleResult {
    /// Best feasible objective; `−∞` when nothing feasible was drawn.
    pub value: f64,
    pub argmax: Option<Vector>,
    pub accepted: usize,
}

/// Best feasible objective among `count` points drawn uniformly from the cube
/// of half-width `radius` around `start`. Always a lower bound on the maximum.
pub fn sample_max_uq(inst: &UqInstance, start: &Vector, radius: f64, count: usize, seed: u64) -> Result<SampleResult> {
    if start.len() != inst.n() {
        return Err(Error::InvalidInput(format!(
            "start has length {}, expected {}",
            start.len(),
            inst.n()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = SampleResult {
        value: f64::NEG_INFINITY,
        argmax: None,
        accepted: 0,
    };
    for _ in 0..count {
        let x = start + Vector::from_fn(inst.n(), |_, _| rng.random_range(-radius..=radius));
        if inst.is_feasible(&x, 0.0) {
            best.accepted += 1;
            let v = inst.objective(&x);
            if v > best.value {
                best.value = v;
                best.argmax = Some(x);
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrsSolution {
    pub value: f64,
    pub x: Vector,
    pub multiplier: f64,
    pub hard_case: bool,
}

/// `min xᵀAx + 2bᵀx  s.t.  ‖x‖ ≤ 1` from the eigen-decomposition of `A` and
/// bisection on the secular equation `Σ c_i²/(λ_i + μ)² = 1`.
pub fn trs_secular(a: &SymMatrix, b: &Vector) -> Result<TrsSolution> {
    let eig = linalg::sym_eig(a)?;
    let n = a.order();
    let c: Vec<f64> = (0..n).map(|k| eig.vector(k).dot(b)).collect();
    let lmin = eig.min();
    let scale = eig.max_abs().max(b.norm()).max(1.0);
    let zero_tol = 1e-12 * scale;
    let x_of = |mu: f64| -> Vector {
        (0..n).fold(Vector::zeros(n), |acc, k| {
            let den = eig.values[k] + mu;
            if den.abs() <= zero_tol {
                acc
            } else {
                acc - eig.vector(k) * (c[k] / den)
            }
        })
    };
    let finish = |x: Vector, mu: f64, hard: bool| TrsSolution {
        value: a.quad_form(&x) + 2.0 * b.dot(&x),
        x,
        multiplier: mu,
        hard_case: hard,
    };
    let mu_lo = (-lmin).max(0.0);
    let bottom: Vec<usize> = (0..n).filter(|&k| (eig.values[k] - lmin).abs() <= zero_tol).collect();
    let degenerate = bottom.iter().all(|&k| c[k].abs() <= zero_tol);
    if degenerate || lmin > zero_tol {
        let x = x_of(mu_lo);
        if x.norm_squared() <= 1.0 {
            if lmin > zero_tol && mu_lo == 0.0 {
                return Ok(finish(x, 0.0, false));
            }
            // μ = −λ_min with slack: move along the bottom eigenvector
            let tau = (1.0 - x.norm_squared()).max(0.0).sqrt();
            let x = if lmin < -zero_tol { x + eig.vector(bottom[0]) * tau } else { x };
            return Ok(finish(x, mu_lo, lmin < -zero_tol));
        }
    }
    let phi = |mu: f64| x_of(mu).norm_squared() - 1.0;
    let mut lo = mu_lo;
    let mut hi = mu_lo + b.norm() + 1.0;
    while phi(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(finish(x_of(hi), hi, false))
}
