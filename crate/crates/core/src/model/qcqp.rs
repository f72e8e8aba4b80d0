use super::{Bound, Sense};
use crate::error::{Error, Result};
use crate::linalg::{self, SymMatrix, Vector};

/// Structured QCQP over PSD blocks:
///
/// ```text
/// opt  g₀(x)  s.t.  l_i ≤ g_i(x) ≤ u_i,
/// g_i(x) = Σ_j a_ij xᵀQ_jx + 2b_iᵀx + c_i,   a_ij ∈ {−1, 0, 1}
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct QcqpInstance {
    n: usize,
    sense: Sense,
    blocks: Vec<SymMatrix>,
    signs: Vec<Vec<i8>>,
    b: Vec<Vector>,
    c: Vec<f64>,
    bounds: Vec<Bound>,
}

/// Tolerance for clamping slightly negative block eigenvalues.
pub const BLOCK_PSD_TOL: f64 = 1e-9;

impl QcqpInstance {
    /// `signs`, `b` and `c` carry `p + 1` rows (row 0 is the objective).
    /// Blocks with small negative eigenvalues are clamped to PSD.
    pub fn new(
        n: usize,
        sense: Sense,
        blocks: Vec<SymMatrix>,
        signs: Vec<Vec<i8>>,
        b: Vec<Vector>,
        c: Vec<f64>,
        bounds: Vec<Bound>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInstance("n must be positive".into()));
        }
        let p = bounds.len();
        let m = blocks.len();
        if signs.len() != p + 1 || b.len() != p + 1 || c.len() != p + 1 {
            return Err(Error::InvalidInstance(format!(
                "expected {} rows of signs, linear terms and constants",
                p + 1
            )));
        }
        let mut clamped = Vec::with_capacity(m);
        for (j, q) in blocks.into_iter().enumerate() {
            if q.order() != n {
                return Err(Error::InvalidInstance(format!(
                    "block {j} has order {}, expected {n}",
                    q.order()
                )));
            }
            clamped.push(linalg::psd_clamp(&q, BLOCK_PSD_TOL)?);
        }
        for (i, row) in signs.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidInstance(format!(
                    "sign row {i} has {} entries, expected {m}",
                    row.len()
                )));
            }
            if row.iter().any(|&a| !(-1..=1).contains(&a)) {
                return Err(Error::InvalidInstance(format!(
                    "sign row {i} has entries outside {{-1, 0, 1}}"
                )));
            }
        }
        for (i, bi) in b.iter().enumerate() {
            if bi.len() != n || bi.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInstance(format!("b[{i}] malformed")));
            }
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInstance("constants must be finite".into()));
        }
        for bd in &bounds {
            bd.validate()?;
        }
        Ok(QcqpInstance {
            n,
            sense,
            blocks: clamped,
            signs,
            b,
            c,
            bounds,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.blocks.len()
    }

    pub fn p(&self) -> usize {
        self.bounds.len()
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn blocks(&self) -> &[SymMatrix] {
        &self.blocks
    }

    pub fn block(&self, j: usize) -> &SymMatrix {
        &self.blocks[j]
    }

    /// `a_ij`, row `i ∈ 0..=p`, block `j ∈ 0..m`.
    pub fn sign(&self, i: usize, j: usize) -> i8 {
        self.signs[i][j]
    }

    pub fn signs(&self) -> &[Vec<i8>] {
        &self.signs
    }

    pub fn b(&self, i: usize) -> &Vector {
        &self.b[i]
    }

    pub fn bs(&self) -> &[Vector] {
        &self.b
    }

    pub fn c(&self, i: usize) -> f64 {
        self.c[i]
    }

    pub fn cs(&self) -> &[f64] {
        &self.c
    }

    /// Bound of constraint `i ∈ 1..=p`.
    pub fn bound(&self, i: usize) -> &Bound {
        &self.bounds[i - 1]
    }

    pub fn bounds(&self) -> &[Bound] {
        &self.bounds
    }

    /// `g_i(x)`
    pub fn eval_g(&self, i: usize, x: &Vector) -> Result<f64> {
        if i > self.p() {
            return Err(Error::InvalidIndex {
                index: i,
                max: self.p(),
            });
        }
        if x.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "point has length {}, expected {}",
                x.len(),
                self.n
            )));
        }
        Ok(self.g(i, x))
    }

    pub(crate) fn g(&self, i: usize, x: &Vector) -> f64 {
        let quad: f64 = self
            .blocks
            .iter()
            .zip(&self.signs[i])
            .filter(|(_, &a)| a != 0)
            .map(|(q, &a)| a as f64 * q.quad_form(x))
            .sum();
        quad + 2.0 * self.b[i].dot(x) + self.c[i]
    }

    pub fn objective(&self, x: &Vector) -> f64 {
        self.g(0, x)
    }

    pub fn max_violation(&self, x: &Vector) -> f64 {
        (1..=self.p())
            .map(|i| self.bound(i).violation(self.g(i, x)))
            .fold(0.0, f64::max)
    }

    pub fn is_feasible(&self, x: &Vector, tol: f64) -> bool {
        x.len() == self.n && self.max_violation(x) <= tol
    }

    /// Every constraint is of the form `g_i ≤ u_i`.
    pub fn is_one_sided(&self) -> bool {
        self.bounds.iter().all(|b| b.lower.is_none())
    }

    /// Blocks `j` with `a_ij = −1` for some row `i` (objective included).
    pub fn lifted_one_sided(&self) -> Vec<usize> {
        (0..self.m())
            .filter(|&j| self.signs.iter().any(|row| row[j] == -1))
            .collect()
    }

    /// Blocks `j` with `a_0j = −1` or `a_ij ≠ 0` for some constraint `i ≥ 1`.
    pub fn lifted_two_sided(&self) -> Vec<usize> {
        (0..self.m())
            .filter(|&j| self.signs[0][j] == -1 || self.signs[1..].iter().any(|row| row[j] != 0))
            .collect()
    }
}
