use nalgebra::DMatrix;

use super::{Bound, UqInstance};
use crate::error::{Error, Result};
use crate::linalg::{SymMatrix, Vector};

/// Rewrites `max cᵀx s.t. Ax ≤ rhs, x ∈ {0,1}ⁿ` as a uniform QCQP with `Q = I`:
///
/// ```text
/// max  xᵀx + (c − e)ᵀx
/// s.t. xᵀx + (a_i − e)ᵀx ≤ rhs_i          i = 1..m
///      0 ≤ xᵀx − eᵀx ≤ 0
///      0 ≤ xᵀx + (e_j − e)ᵀx ≤ 1          j = 1..n
/// ```
///
/// Linear terms are halved to fit the `2bᵀx` convention. Row order: the `m`
/// inequality rows, then the equality row, then the `n` box rows.
pub fn ilp_to_uq(c: &Vector, a: &DMatrix<f64>, rhs: &Vector) -> Result<UqInstance> {
    let n = c.len();
    if n == 0 {
        return Err(Error::InvalidInstance("ILP needs at least one variable".into()));
    }
    if a.nrows() != rhs.len() || (a.nrows() > 0 && a.ncols() != n) {
        return Err(Error::InvalidInstance(format!(
            "constraint matrix is {}x{}, rhs has {}, n = {n}",
            a.nrows(),
            a.ncols(),
            rhs.len()
        )));
    }
    if c.iter().chain(a.iter()).chain(rhs.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInstance("ILP data must be finite".into()));
    }
    let e = Vector::from_element(n, 1.0);
    let unit = |j: usize| Vector::from_fn(n, |k, _| if k == j { 1.0 } else { 0.0 });
    let mut b = vec![(c - &e) * 0.5];
    let mut bounds = Vec::new();
    for i in 0..a.nrows() {
        let ai = a.row(i).transpose();
        b.push((ai - &e) * 0.5);
        bounds.push(Bound::upper(rhs[i]));
    }
    b.push(&e * -0.5);
    bounds.push(Bound::equal(0.0));
    for j in 0..n {
        b.push((unit(j) - &e) * 0.5);
        bounds.push(Bound::range(0.0, 1.0));
    }
    let d = vec![0.0; bounds.len() + 1];
    UqInstance::new(SymMatrix::identity(n), b, d, bounds)
}

/// Brute-force optimum of a binary ILP; `None` if infeasible. Only meant for
/// small `n`.
pub fn enumerate_binary_ilp(c: &Vector, a: &DMatrix<f64>, rhs: &Vector) -> Option<(f64, Vector)> {
    let n = c.len();
    assert!(n < 31, "enumeration is exponential in n");
    let mut best: Option<(f64, Vector)> = None;
    for mask in 0u32..(1 << n) {
        let x = Vector::from_fn(n, |k, _| f64::from((mask >> k) & 1));
        let ok = (0..a.nrows()).all(|i| a.row(i).transpose().dot(&x) <= rhs[i]);
        if !ok {
            continue;
        }
        let v = c.dot(&x);
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, x));
        }
    }
    best
}
