#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uqcone::conesolver::{solve, SolverOptions, SolverResult};
use uqcone::reformulate::build_socp_uq;
use uqcone::{BallIntersection, Bound, SymMatrix, UqInstance, Vector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn v(xs: &[f64]) -> Vector {
    Vector::from_row_slice(xs)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vector {
    Vector::from_fn(n, |_, _| rng.random_range(-r..r))
}

/// `AAᵀ/n + shift·I` with `A` uniform on `[−1, 1]`.
pub fn random_pd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> SymMatrix {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let m = &a * a.transpose() / n as f64 + DMatrix::identity(n, n) * shift;
    SymMatrix::symmetrize(&m)
}

/// `Q ≻ 0` and `p ≤ n − 1` rows, each an upper bound or (one time in three)
/// a range, all satisfied with slack at a random point.
pub fn random_low_rank_uq(rng: &mut ChaCha8Rng, n: usize, p: usize) -> UqInstance {
    let q = random_pd(rng, n, 0.3);
    let xhat = random_vec(rng, n, 0.5);
    let mut b = vec![random_vec(rng, n, 1.0)];
    let mut d = vec![rng.random_range(-1.0..1.0)];
    let mut bounds = Vec::new();
    for _ in 0..p {
        let bi = random_vec(rng, n, 1.0);
        let di = rng.random_range(-1.0..1.0);
        let f = q.quad_form(&xhat) + 2.0 * bi.dot(&xhat) + di;
        let hi = f + rng.random_range(0.2..1.5);
        bounds.push(if rng.random_range(0..3) == 0 {
            Bound::range(f - rng.random_range(0.2..1.0), hi)
        } else {
            Bound::upper(hi)
        });
        b.push(bi);
        d.push(di);
    }
    UqInstance::new(q, b, d, bounds).unwrap()
}

/// `Q ≻ 0`, upper-bound rows only, `d₀ = 0` and `d_i < u_i` so the origin is
/// strictly interior.
pub fn random_interior_uq(rng: &mut ChaCha8Rng, n: usize, p: usize) -> UqInstance {
    // Heavily overlapping ellipsoids. When the first n + 1 row vectors sum to
    // zero they positively span the space, the polyhedral part of the
    // relaxation peaks near the origin inside the cone and the relaxation gap
    // is open; otherwise the cone usually binds and the relaxation is tight.
    let q = random_pd(rng, n, 0.2);
    let balanced = rng.random_range(0..2) == 0 && p > n;
    let pull = rng.random_range(0.01..0.3);
    let mut b = vec![random_vec(rng, n, pull)];
    let mut d = vec![0.0];
    let mut bounds = Vec::new();
    let mut sum = Vector::zeros(n);
    for i in 0..p {
        let di = rng.random_range(-0.5..0.5);
        let bi = if balanced && i == n {
            -&sum / (n as f64).sqrt()
        } else {
            random_vec(rng, n, 0.6)
        };
        sum += &bi;
        b.push(bi);
        d.push(di);
        bounds.push(Bound::upper(di + rng.random_range(0.8..1.2)));
    }
    UqInstance::new(q, b, d, bounds).unwrap()
}

/// `p` balls in the plane whose intersection contains a neighbourhood of the
/// origin.
pub fn random_balls(rng: &mut ChaCha8Rng, n: usize, p: usize) -> BallIntersection {
    let centers = (0..p).map(|_| random_vec(rng, n, 0.5)).collect();
    let radii = (0..p).map(|_| rng.random_range(1.0..1.6)).collect();
    BallIntersection::new(centers, radii).unwrap()
}

/// Solves the single-cone relaxation and returns the result with its value.
pub fn relax(inst: &UqInstance) -> (SolverResult, f64) {
    let (prog, meta) = build_socp_uq(inst).unwrap();
    let res = solve(&prog, &SolverOptions::default()).unwrap();
    let value = meta.original_value(res.objective);
    (res, value)
}
