use nalgebra::DMatrix;

use super::Bound;
use crate::conesolver::{self, ConeProgram, SolverOptions, SolverStatus};
use crate::error::{Error, Result};
use crate::linalg::{self, SymMatrix, Vector};

/// Uniform QCQP `max f₀(x) s.t. l_i ≤ f_i(x) ≤ u_i` with
/// `f_i(x) = xᵀQx + 2b_iᵀx + d_i` sharing one `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct UqInstance {
    q: SymMatrix,
    b: Vec<Vector>,
    d: Vec<f64>,
    bounds: Vec<Bound>,
}

impl UqInstance {
    /// `b` and `d` carry `p + 1` entries (index 0 is the objective), `bounds`
    /// carries `p`.
    pub fn new(q: SymMatrix, b: Vec<Vector>, d: Vec<f64>, bounds: Vec<Bound>) -> Result<Self> {
        let n = q.order();
        if n == 0 {
            return Err(Error::InvalidInstance("n must be positive".into()));
        }
        if !q.is_finite() {
            return Err(Error::InvalidMatrix("Q has non-finite entries".into()));
        }
        if bounds.is_empty() {
            return Err(Error::InvalidInstance("at least one constraint required".into()));
        }
        if b.len() != bounds.len() + 1 || d.len() != bounds.len() + 1 {
            return Err(Error::InvalidInstance(format!(
                "expected {} linear terms and offsets, got {} and {}",
                bounds.len() + 1,
                b.len(),
                d.len()
            )));
        }
        for (i, bi) in b.iter().enumerate() {
            if bi.len() != n {
                return Err(Error::InvalidInstance(format!(
                    "b[{i}] has length {}, expected {n}",
                    bi.len()
                )));
            }
            if bi.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInstance(format!("b[{i}] is not finite")));
            }
        }
        if d.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInstance("offsets must be finite".into()));
        }
        for bd in &bounds {
            bd.validate()?;
        }
        Ok(UqInstance { q, b, d, bounds })
    }

    pub fn n(&self) -> usize {
        self.q.order()
    }

    /// Number of constraints.
    pub fn p(&self) -> usize {
        self.bounds.len()
    }

    pub fn q(&self) -> &SymMatrix {
        &self.q
    }

    pub fn b(&self, i: usize) -> &Vector {
        &self.b[i]
    }

    pub fn bs(&self) -> &[Vector] {
        &self.b
    }

    /// Constraint linear terms `b₁ … b_p`.
    pub fn constraint_bs(&self) -> &[Vector] {
        &self.b[1..]
    }

    pub fn d(&self, i: usize) -> f64 {
        self.d[i]
    }

    pub fn ds(&self) -> &[f64] {
        &self.d
    }

    /// Bound of constraint `i ∈ 1..=p`.
    pub fn bound(&self, i: usize) -> &Bound {
        &self.bounds[i - 1]
    }

    pub fn bounds(&self) -> &[Bound] {
        &self.bounds
    }

    /// Same data with the objective replaced.
    pub fn with_objective(&self, b0: Vector, d0: f64) -> Result<Self> {
        let mut b = self.b.clone();
        let mut d = self.d.clone();
        b[0] = b0;
        d[0] = d0;
        Self::new(self.q.clone(), b, d, self.bounds.clone())
    }

    /// `xᵀQx + 2b_iᵀx + d_i`
    pub fn eval_f(&self, i: usize, x: &Vector) -> Result<f64> {
        if i > self.p() {
            return Err(Error::InvalidIndex {
                index: i,
                max: self.p(),
            });
        }
        if x.len() != self.n() {
            return Err(Error::InvalidInput(format!(
                "point has length {}, expected {}",
                x.len(),
                self.n()
            )));
        }
        Ok(self.f(i, x))
    }

    #[inline]
    pub(crate) fn f(&self, i: usize, x: &Vector) -> f64 {
        self.q.quad_form(x) + 2.0 * self.b[i].dot(x) + self.d[i]
    }

    pub fn objective(&self, x: &Vector) -> f64 {
        self.f(0, x)
    }

    /// Worst bound violation over all constraints.
    pub fn max_violation(&self, x: &Vector) -> f64 {
        (1..=self.p())
            .map(|i| self.bound(i).violation(self.f(i, x)))
            .fold(0.0, f64::max)
    }

    /// `l_i − tol ≤ f_i(x) ≤ u_i + tol` for every `i`.
    pub fn is_feasible(&self, x: &Vector, tol: f64) -> bool {
        x.len() == self.n() && self.max_violation(x) <= tol
    }

    /// Changes variables `y = Q^{1/2}x` so the shared Hessian becomes `I`.
    /// Offsets move into the bounds: the returned instance has `d = 0`.
    pub fn normalize_uq(&self) -> Result<(UqInstance, NormalizeMap)> {
        let inv_sqrt = linalg::pd_inv_sqrt(&self.q, 1e-12)?;
        let sqrt = linalg::psd_sqrt(&self.q, 1e-12)?;
        let b = self.b.iter().map(|bi| inv_sqrt.mul_vec(bi)).collect();
        let bounds = self
            .bounds
            .iter()
            .zip(&self.d[1..])
            .map(|(bd, &di)| bd.shifted(di))
            .collect();
        let inst = UqInstance::new(
            SymMatrix::identity(self.n()),
            b,
            vec![0.0; self.p() + 1],
            bounds,
        )?;
        Ok((
            inst,
            NormalizeMap {
                inv_sqrt,
                sqrt,
                offsets: self.d.clone(),
            },
        ))
    }

    /// Moves the origin to `x̂`: the returned instance satisfies
    /// `f_i′(x) = f_i(x + x̂)`. The second value is `f₀(x̂)`, which callers can
    /// subtract from `d₀′` to re-zero the objective.
    pub fn translate_origin(&self, xhat: &Vector) -> Result<(UqInstance, f64)> {
        if xhat.len() != self.n() {
            return Err(Error::InvalidInput(format!(
                "translation has length {}, expected {}",
                xhat.len(),
                self.n()
            )));
        }
        let qx = self.q.mul_vec(xhat);
        let b = self.b.iter().map(|bi| bi + &qx).collect();
        let d = (0..=self.p()).map(|i| self.f(i, xhat)).collect();
        let inst = UqInstance::new(self.q.clone(), b, d, self.bounds.clone())?;
        let offset = self.f(0, xhat);
        Ok((inst, offset))
    }

    /// Objective scale used for relative tolerances.
    pub fn scale(&self) -> f64 {
        let mut s = self.q.max_abs().max(1.0);
        for bi in &self.b {
            s = s.max(bi.amax());
        }
        for di in &self.d {
            s = s.max(di.abs());
        }
        for bd in &self.bounds {
            for v in [bd.lower, bd.upper].into_iter().flatten() {
                s = s.max(v.abs());
            }
        }
        s
    }
}

/// Back-transform produced by [`UqInstance::normalize_uq`].
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizeMap {
    inv_sqrt: SymMatrix,
    sqrt: SymMatrix,
    offsets: Vec<f64>,
}

impl NormalizeMap {
    /// `x = Q^{−1/2} y`
    pub fn to_original(&self, y: &Vector) -> Vector {
        self.inv_sqrt.mul_vec(y)
    }

    /// `y = Q^{1/2} x`
    pub fn to_normalized(&self, x: &Vector) -> Vector {
        self.sqrt.mul_vec(x)
    }

    /// `d_i`, so that `f_i(x) = f̂_i(y) + d_i`.
    pub fn offset(&self, i: usize) -> f64 {
        self.offsets[i]
    }
}

/// Strictly interior point with its smallest slack `min_i (u_i − f_i(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorPoint {
    pub x: Vector,
    pub margin: f64,
}

/// Finds a point maximising the smallest slack of the upper-bounded rows by
/// solving `max s  s.t.  t + 2b_iᵀx + d_i + s ≤ u_i,  xᵀQx ≤ t`.
pub fn find_interior_point(inst: &UqInstance, opts: &SolverOptions) -> Result<InteriorPoint> {
    let n = inst.n();
    if inst.bounds().iter().any(|b| b.lower.is_some()) {
        return Err(Error::WrongShape(
            "interior point search expects one-sided constraints (all l_i = −∞)".into(),
        ));
    }
    let rows: Vec<usize> = (1..=inst.p()).filter(|&i| inst.bound(i).upper.is_some()).collect();
    if rows.is_empty() {
        return Err(Error::InvalidInstance(
            "no finite upper bound: every point is interior".into(),
        ));
    }
    let root = linalg::psd_sqrt(inst.q(), 1e-10)?;
    // variables (x, t, s)
    let nv = n + 2;
    let mut prog = ConeProgram::new(nv);
    let mut c = Vector::zeros(nv);
    c[n + 1] = -1.0;
    prog.set_objective(c, 0.0)?;
    for &i in &rows {
        let mut row = Vector::zeros(nv);
        row.rows_mut(0, n).copy_from(&(inst.b(i) * 2.0));
        row[n] = 1.0;
        row[n + 1] = 1.0;
        prog.add_le(row, inst.bound(i).upper.unwrap() - inst.d(i))?;
    }
    let mut r = DMatrix::zeros(n, nv);
    r.view_mut((0, 0), (n, n)).copy_from(&root.to_dense());
    let mut w = Vector::zeros(nv);
    w[n] = 1.0;
    prog.add_quad_le(&r, &w, 0.0)?;
    let res = conesolver::solve(&prog, opts)?;
    if res.status != SolverStatus::Optimal {
        return Err(Error::Solver { status: res.status });
    }
    let x = res.x.rows(0, n).into_owned();
    let margin = rows
        .iter()
        .map(|&i| inst.bound(i).upper.unwrap() - inst.f(i, &x))
        .fold(f64::INFINITY, f64::min);
    let scale = rows
        .iter()
        .map(|&i| (inst.bound(i).upper.unwrap() - inst.d(i)).abs())
        .fold(1.0, f64::max);
    if margin <= 1e-7 * scale {
        return Err(Error::EmptyInterior { margin });
    }
    Ok(InteriorPoint { x, margin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    pub(crate) fn example1() -> UqInstance {
        UqInstance::new(
            SymMatrix::identity(1),
            vec![v(&[0.0]), v(&[1.0]), v(&[-1.0])],
            vec![0.0, 0.0, 0.0],
            vec![Bound::range(1.0, 3.0), Bound::range(-1.0, 3.0)],
        )
        .unwrap()
    }

    fn random_instance(n: usize, p: usize, rng: &mut ChaCha8Rng) -> UqInstance {
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let q = SymMatrix::symmetrize(&(a.transpose() * &a)).shift_diagonal(0.5);
        let b = (0..=p)
            .map(|_| Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)))
            .collect();
        let d = (0..=p).map(|_| rng.random_range(-1.0..1.0)).collect();
        let bounds = (0..p).map(|_| Bound::upper(rng.random_range(1.0..3.0))).collect();
        UqInstance::new(q, b, d, bounds).unwrap()
    }

    #[test]
    fn eval_example1() {
        let e = example1();
        assert_eq!(e.eval_f(1, &v(&[1.0])).unwrap(), 3.0);
        assert_eq!(e.eval_f(2, &v(&[1.0])).unwrap(), -1.0);
        assert!(matches!(e.eval_f(3, &v(&[1.0])), Err(Error::InvalidIndex { .. })));
        assert_eq!(e.eval_f(2, &v(&[0.0])).unwrap(), e.d(2));
    }

    #[test]
    fn eval_matches_naive_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let inst = random_instance(3, 2, &mut rng);
        let x = v(&[0.3, -1.2, 0.7]);
        for i in 0..=2 {
            let mut acc = inst.d(i);
            for r in 0..3 {
                for c in 0..3 {
                    acc += x[r] * inst.q().get(r, c) * x[c];
                }
                acc += 2.0 * inst.b(i)[r] * x[r];
            }
            assert!((acc - inst.eval_f(i, &x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn feasibility_example1() {
        let e = example1();
        assert!(e.is_feasible(&v(&[1.0]), 1e-9));
        assert!(!e.is_feasible(&v(&[0.0]), 1e-9));
        let free = UqInstance::new(
            SymMatrix::identity(1),
            vec![v(&[0.0]), v(&[1.0])],
            vec![0.0, 0.0],
            vec![Bound::free()],
        )
        .unwrap();
        assert!(free.is_feasible(&v(&[123.0]), 0.0));
    }

    #[test]
    fn normalize_identity_and_diag() {
        let e = example1();
        let (ne, map) = e.normalize_uq().unwrap();
        assert_eq!(ne.b(1), e.b(1));
        assert_eq!(map.to_original(&v(&[2.0])), v(&[2.0]));

        let inst = UqInstance::new(
            SymMatrix::from_diagonal(&[4.0, 1.0]),
            vec![v(&[0.0, 0.0]), v(&[2.0, 0.0])],
            vec![0.0, 0.5],
            vec![Bound::upper(1.0)],
        )
        .unwrap();
        let (ni, _) = inst.normalize_uq().unwrap();
        assert!((ni.b(1) - v(&[1.0, 0.0])).amax() < 1e-14);
        assert_eq!(ni.bound(1).upper, Some(0.5));
    }

    #[test]
    fn normalize_rejects_singular() {
        let inst = UqInstance::new(
            SymMatrix::from_diagonal(&[1.0, 0.0]),
            vec![v(&[0.0, 0.0]), v(&[1.0, 0.0])],
            vec![0.0, 0.0],
            vec![Bound::upper(1.0)],
        )
        .unwrap();
        assert!(matches!(inst.normalize_uq(), Err(Error::NotPositiveDefinite(_))));
    }

    #[test]
    fn normalize_round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let inst = random_instance(3, 3, &mut rng);
            let (ni, map) = inst.normalize_uq().unwrap();
            for _ in 0..10 {
                let y = Vector::from_fn(3, |_, _| rng.random_range(-2.0..2.0));
                let x = map.to_original(&y);
                for i in 0..=3 {
                    let lhs = inst.f(i, &x);
                    let rhs = ni.f(i, &y) + map.offset(i);
                    assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()));
                }
                assert!((map.to_normalized(&x) - &y).amax() < 1e-9);
            }
        }
    }

    #[test]
    fn translate_small_case() {
        let inst = UqInstance::new(
            SymMatrix::identity(1),
            vec![v(&[0.0]), v(&[1.0])],
            vec![0.0, 0.0],
            vec![Bound::upper(5.0)],
        )
        .unwrap();
        let (t, off) = inst.translate_origin(&v(&[1.0])).unwrap();
        assert_eq!(t.b(1)[0], 2.0);
        assert_eq!(t.d(1), 3.0);
        assert_eq!(off, 1.0);
        let (same, zero) = inst.translate_origin(&v(&[0.0])).unwrap();
        assert_eq!(same, inst);
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn translate_evaluation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let inst = random_instance(3, 2, &mut rng);
        let xhat = v(&[0.5, -0.25, 1.0]);
        let (t, _) = inst.translate_origin(&xhat).unwrap();
        for _ in 0..100 {
            let x = Vector::from_fn(3, |_, _| rng.random_range(-2.0..2.0));
            for i in 0..=2 {
                let a = t.f(i, &x);
                let b = inst.f(i, &(&x + &xhat));
                assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()));
            }
        }
    }

    fn balls(centers: &[Vec<f64>], radii: &[f64]) -> UqInstance {
        let n = centers[0].len();
        let mut b = vec![Vector::zeros(n)];
        let mut d = vec![0.0];
        let mut bounds = Vec::new();
        for (c, r) in centers.iter().zip(radii) {
            let c = Vector::from_row_slice(c);
            d.push(c.norm_squared());
            b.push(-c);
            bounds.push(Bound::upper(r * r));
        }
        UqInstance::new(SymMatrix::identity(n), b, d, bounds).unwrap()
    }

    #[test]
    fn interior_single_ball() {
        let inst = balls(&[vec![0.0, 0.0]], &[1.0]);
        let ip = find_interior_point(&inst, &SolverOptions::default()).unwrap();
        assert!(ip.x.amax() < 1e-6);
        assert!((ip.margin - 1.0).abs() < 1e-6);
    }

    #[test]
    fn interior_two_balls_symmetric() {
        let inst = balls(&[vec![0.5, 0.0], vec![-0.5, 0.0]], &[1.0, 1.0]);
        let ip = find_interior_point(&inst, &SolverOptions::default()).unwrap();
        assert!(ip.x.amax() < 1e-6);
    }

    #[test]
    fn interior_touching_balls() {
        let inst = balls(&[vec![1.0, 0.0], vec![-1.0, 0.0]], &[1.0, 1.0]);
        let r = find_interior_point(&inst, &SolverOptions::default());
        assert!(matches!(r, Err(Error::EmptyInterior { .. })), "{r:?}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn translate_inverse_is_identity(seed in 0u64..1000, t in proptest::collection::vec(-2.0f64..2.0, 3)) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let inst = random_instance(3, 2, &mut rng);
                let xhat = Vector::from_row_slice(&t);
                let (fwd, _) = inst.translate_origin(&xhat).unwrap();
                let (back, _) = fwd.translate_origin(&(-&xhat)).unwrap();
                for i in 0..=2 {
                    prop_assert!((back.b(i) - inst.b(i)).amax() < 1e-10);
                    prop_assert!((back.d(i) - inst.d(i)).abs() < 1e-10 * (1.0 + inst.d(i).abs()) + 1e-10);
                }
            }

            #[test]
            fn normalize_preserves_feasibility(seed in 0u64..1000, x in proptest::collection::vec(-2.0f64..2.0, 3)) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let inst = random_instance(3, 3, &mut rng);
                let (ni, map) = inst.normalize_uq().unwrap();
                let x = Vector::from_row_slice(&x);
                let y = map.to_normalized(&x);
                // keep clear of the boundary where rounding could flip the verdict
                let slack = (1..=3).map(|i| (inst.bound(i).upper.unwrap() - inst.f(i, &x)).abs()).fold(f64::INFINITY, f64::min);
                prop_assume!(slack > 1e-8);
                prop_assert_eq!(inst.is_feasible(&x, 0.0), ni.is_feasible(&y, 0.0));
            }

            #[test]
            fn feasible_means_within_bounds(seed in 0u64..1000, x in proptest::collection::vec(-1.0f64..1.0, 3)) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let inst = random_instance(3, 3, &mut rng);
                let x = Vector::from_row_slice(&x);
                if inst.is_feasible(&x, 1e-6) {
                    for i in 1..=3 {
                        prop_assert!(inst.eval_f(i, &x).unwrap() <= inst.bound(i).upper.unwrap() + 1e-6);
                    }
                }
            }
        }
    }
}
