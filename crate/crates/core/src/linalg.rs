//! Dense symmetric linear algebra: eigendecomposition, PSD square roots,
//! numerical rank and subspace bases.
//!
//! Every rank decision goes through a single relative tolerance (see
//! [`DEFAULT_RANK_TOL`]) measured against the largest singular value.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;

/// Relative tolerance used by every rank-type decision in the crate.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Symmetric matrix stored as a packed, row-major upper triangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    n: usize,
    packed: Vec<f64>,
}

#[inline]
fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * i.saturating_sub(1) / 2 + (j - i)
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            packed: vec![0.0; n * (n + 1) / 2],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, s);
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    /// Builds from a packed row-major upper triangle.
    pub fn from_upper(n: usize, packed: Vec<f64>) -> Result<Self> {
        if packed.len() != n * (n + 1) / 2 {
            return Err(Error::InvalidMatrix(format!(
                "packed upper triangle of order {n} needs {} entries, got {}",
                n * (n + 1) / 2,
                packed.len()
            )));
        }
        Ok(SymMatrix { n, packed })
    }

    /// Builds from a dense matrix, requiring symmetry up to `1e-12` relative.
    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidMatrix(format!(
                "not square: {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        let scale = m.amax().max(1.0);
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidMatrix(format!(
                        "not symmetric at ({i},{j})"
                    )));
                }
                out.set(i, j, 0.5 * (m[(i, j)] + m[(j, i)]));
            }
        }
        Ok(out)
    }

    /// Symmetric part `(M + Mᵀ)/2` of an arbitrary square matrix.
    pub fn symmetrize(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                out.set(i, j, 0.5 * (m[(i, j)] + m[(j, i)]));
            }
        }
        out
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn packed(&self) -> &[f64] {
        &self.packed
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.packed[packed_index(self.n, i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = packed_index(self.n, i, j);
        self.packed[k] = v;
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn is_finite(&self) -> bool {
        self.packed.iter().all(|v| v.is_finite())
    }

    pub fn mul_vec(&self, x: &Vector) -> Vector {
        Vector::from_fn(self.n, |i, _| {
            (0..self.n).map(|j| self.get(i, j) * x[j]).sum::<f64>()
        })
    }

    /// `xᵀ M x`
    pub fn quad_form(&self, x: &Vector) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            acc += self.get(i, i) * x[i] * x[i];
            for j in (i + 1)..self.n {
                acc += 2.0 * self.get(i, j) * x[i] * x[j];
            }
        }
        acc
    }

    /// `xᵀ M y`
    pub fn bilinear(&self, x: &Vector, y: &Vector) -> f64 {
        x.dot(&self.mul_vec(y))
    }

    pub fn scale(&self, s: f64) -> Self {
        SymMatrix {
            n: self.n,
            packed: self.packed.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &SymMatrix) -> Self {
        assert_eq!(self.n, other.n);
        SymMatrix {
            n: self.n,
            packed: self
                .packed
                .iter()
                .zip(&other.packed)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &SymMatrix) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// `M + s·I`
    pub fn shift_diagonal(&self, s: f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            out.set(i, i, self.get(i, i) + s);
        }
        out
    }

    /// Congruence `Rᵀ M R`.
    pub fn congruence(&self, r: &DMatrix<f64>) -> Self {
        Self::symmetrize(&(r.transpose() * self.to_dense() * r))
    }

    pub fn max_abs(&self) -> f64 {
        self.packed.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.to_dense().norm()
    }
}

/// Orthonormal basis of a subspace of `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    ambient: usize,
    columns: Vec<Vector>,
}

impl SubspaceBasis {
    pub fn empty(ambient: usize) -> Self {
        SubspaceBasis {
            ambient,
            columns: Vec::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        SubspaceBasis {
            ambient,
            columns: (0..ambient)
                .map(|i| Vector::from_fn(ambient, |k, _| if k == i { 1.0 } else { 0.0 }))
                .collect(),
        }
    }

    /// Orthonormal basis of `span(vectors)`.
    pub fn span_of(ambient: usize, vectors: &[Vector], tol_rel: f64) -> Result<Self> {
        let (u, sv, smax) = padded_svd(ambient, vectors)?;
        let columns = (0..ambient)
            .filter(|&k| smax > 0.0 && sv[k] > tol_rel * smax)
            .map(|k| u.column(k).into_owned())
            .collect();
        Ok(SubspaceBasis { ambient, columns })
    }

    /// Orthonormal basis of the orthogonal complement of `span(vectors)`.
    pub fn complement_of(ambient: usize, vectors: &[Vector], tol_rel: f64) -> Result<Self> {
        let (u, sv, smax) = padded_svd(ambient, vectors)?;
        let columns = (0..ambient)
            .filter(|&k| smax == 0.0 || sv[k] <= tol_rel * smax)
            .map(|k| u.column(k).into_owned())
            .collect();
        Ok(SubspaceBasis { ambient, columns })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn columns(&self) -> &[Vector] {
        &self.columns
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        if self.columns.is_empty() {
            DMatrix::zeros(self.ambient, 0)
        } else {
            DMatrix::from_columns(&self.columns)
        }
    }

    /// Orthogonal projection onto the subspace.
    pub fn project(&self, x: &Vector) -> Vector {
        self.columns
            .iter()
            .fold(Vector::zeros(self.ambient), |acc, c| acc + c * c.dot(x))
    }
}

/// SVD of the `n × max(k, n)` matrix whose leading columns are `vectors`;
/// padding guarantees a full `n × n` left factor.
fn padded_svd(ambient: usize, vectors: &[Vector]) -> Result<(DMatrix<f64>, Vec<f64>, f64)> {
    check_dims(ambient, vectors)?;
    let cols = vectors.len().max(ambient).max(1);
    let mut m = DMatrix::zeros(ambient, cols);
    for (k, v) in vectors.iter().enumerate() {
        m.set_column(k, v);
    }
    if ambient == 0 {
        return Ok((DMatrix::zeros(0, 0), Vec::new(), 0.0));
    }
    let svd = SVD::new(m, true, false);
    let u = svd
        .u
        .ok_or_else(|| Error::InvalidMatrix("SVD failed to produce U".into()))?;
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    Ok((u, sv, smax))
}

fn check_dims(ambient: usize, vectors: &[Vector]) -> Result<()> {
    for (k, v) in vectors.iter().enumerate() {
        if v.len() != ambient {
            return Err(Error::InvalidInput(format!(
                "vector {k} has length {}, expected {ambient}",
                v.len()
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("vector {k} has non-finite entries")));
        }
    }
    Ok(())
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: DMatrix<f64>,
}

impl SymEigen {
    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn vector(&self, k: usize) -> Vector {
        self.vectors.column(k).into_owned()
    }

    /// `V diag(f(λ)) Vᵀ`
    pub fn reconstruct_with(&self, mut f: impl FnMut(f64) -> f64) -> SymMatrix {
        let n = self.values.len();
        let d = DMatrix::from_diagonal(&Vector::from_iterator(
            n,
            self.values.iter().map(|&l| f(l)),
        ));
        SymMatrix::symmetrize(&(&self.vectors * d * self.vectors.transpose()))
    }
}

/// Symmetric eigendecomposition (Householder tridiagonalisation followed by
/// implicit-shift QR), eigenvalues sorted in descending order.
pub fn sym_eig(m: &SymMatrix) -> Result<SymEigen> {
    if !m.is_finite() {
        return Err(Error::InvalidMatrix("non-finite entries".into()));
    }
    let n = m.order();
    if n == 0 {
        return Ok(SymEigen {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::new(m.to_dense());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        // sign convention: largest-magnitude entry positive
        let imax = col.iamax();
        if col[imax] < 0.0 {
            col = -col;
        }
        vectors.set_column(dst, &col);
    }
    Ok(SymEigen { values, vectors })
}

/// Smallest eigenvalue.
pub fn lambda_min(m: &SymMatrix) -> Result<f64> {
    Ok(sym_eig(m)?.min())
}

/// PSD square root. Eigenvalues in `[-tol·max(1, λmax), 0)` are clamped to 0.
pub fn psd_sqrt(m: &SymMatrix, tol: f64) -> Result<SymMatrix> {
    let eig = sym_eig(m)?;
    let allowed = tol * eig.max().max(1.0);
    if eig.min() < -allowed {
        return Err(Error::NotPsd {
            min_eig: eig.min(),
            allowed,
        });
    }
    Ok(eig.reconstruct_with(|l| l.max(0.0).sqrt()))
}

/// Clamps small negative eigenvalues to zero; rejects anything beyond `tol`.
pub fn psd_clamp(m: &SymMatrix, tol: f64) -> Result<SymMatrix> {
    let eig = sym_eig(m)?;
    let allowed = tol * eig.max().max(1.0);
    if eig.min() < -allowed {
        return Err(Error::NotPsd {
            min_eig: eig.min(),
            allowed,
        });
    }
    if eig.min() >= 0.0 {
        return Ok(m.clone());
    }
    Ok(eig.reconstruct_with(|l| l.max(0.0)))
}

/// Inverse square root of a positive definite matrix.
pub fn pd_inv_sqrt(m: &SymMatrix, tol: f64) -> Result<SymMatrix> {
    let eig = sym_eig(m)?;
    if eig.min() <= tol * eig.max().max(1.0) {
        return Err(Error::NotPositiveDefinite(eig.min()));
    }
    Ok(eig.reconstruct_with(|l| 1.0 / l.sqrt()))
}

/// Factor `R` with `RᵀR = M` for PSD `M`, keeping only the rows of
/// eigenvalues above `tol_rel · max(1, λ_max)` (so `R` may have fewer than
/// `n` rows).
pub fn psd_factor(m: &SymMatrix, tol_rel: f64) -> Result<DMatrix<f64>> {
    let eig = sym_eig(m)?;
    let n = m.order();
    let scale = eig.max_abs().max(1.0);
    if eig.min() < -tol_rel * scale {
        return Err(Error::NotPsd {
            min_eig: eig.min(),
            allowed: -tol_rel * scale,
        });
    }
    let keep: Vec<usize> = (0..n).filter(|&k| eig.values[k] > tol_rel * scale).collect();
    let mut r = DMatrix::zeros(keep.len(), n);
    for (row, &k) in keep.iter().enumerate() {
        let v = eig.vector(k);
        let s = eig.values[k].sqrt();
        for j in 0..n {
            r[(row, j)] = s * v[j];
        }
    }
    Ok(r)
}

/// Number of singular values of `[v₁ … v_k]` above `tol_rel · σ_max`.
pub fn numerical_rank(vectors: &[Vector], tol_rel: f64) -> Result<usize> {
    let Some(first) = vectors.first() else {
        return Ok(0);
    };
    let n = first.len();
    check_dims(n, vectors)?;
    if n == 0 {
        return Ok(0);
    }
    let m = DMatrix::from_columns(vectors);
    let sv = m.singular_values();
    let smax = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > tol_rel * smax).count())
}

/// Null space of a symmetric matrix (eigenvectors with `|λ| ≤ tol_rel·max|λ|`).
pub fn null_basis(m: &SymMatrix, tol_rel: f64) -> Result<SubspaceBasis> {
    Ok(split_spectrum(m, tol_rel)?.1)
}

/// Range of a symmetric matrix (eigenvectors with `|λ| > tol_rel·max|λ|`).
pub fn range_basis(m: &SymMatrix, tol_rel: f64) -> Result<SubspaceBasis> {
    Ok(split_spectrum(m, tol_rel)?.0)
}

fn split_spectrum(m: &SymMatrix, tol_rel: f64) -> Result<(SubspaceBasis, SubspaceBasis)> {
    let eig = sym_eig(m)?;
    let n = m.order();
    let cut = tol_rel * eig.max_abs();
    let mut range = SubspaceBasis::empty(n);
    let mut null = SubspaceBasis::empty(n);
    for (k, &l) in eig.values.iter().enumerate() {
        if eig.max_abs() > 0.0 && l.abs() > cut {
            range.columns.push(eig.vector(k));
        } else {
            null.columns.push(eig.vector(k));
        }
    }
    Ok((range, null))
}

/// Dimension of `span(∪ bases ∪ extra_vectors)`.
pub fn union_dim(bases: &[&SubspaceBasis], extra: &[Vector], tol_rel: f64) -> Result<usize> {
    let cols = stack_columns(bases, extra);
    if let Some(b) = bases.first() {
        check_dims(b.ambient, &cols)?;
    }
    numerical_rank(&cols, tol_rel)
}

/// All basis columns followed by the extra vectors.
pub fn stack_columns(bases: &[&SubspaceBasis], extra: &[Vector]) -> Vec<Vector> {
    bases
        .iter()
        .flat_map(|b| b.columns.iter().cloned())
        .chain(extra.iter().cloned())
        .collect()
}

/// Solves `M x = rhs` for symmetric positive definite `M` via Cholesky.
pub fn spd_solve(m: &SymMatrix, rhs: &Vector) -> Result<Vector> {
    let chol = m
        .to_dense()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite(lambda_min(m).unwrap_or(f64::NAN)))?;
    Ok(chol.solve(rhs))
}

/// Real roots of `a·s² + 2b·s + c = 0` in ascending order, computed with
/// the cancellation-free formula. Returns `None` when there are no real roots.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    if a == 0.0 {
        if b == 0.0 {
            return None;
        }
        let r = -c / (2.0 * b);
        return Some((r, r));
    }
    let disc = b * b - a * c;
    if disc < 0.0 {
        return None;
    }
    let q = -(b + b.signum() * disc.sqrt());
    let (r1, r2) = if q == 0.0 {
        (0.0, 0.0)
    } else {
        (q / a, c / q)
    };
    Some(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
}
