//! Dense quasi-definite KKT system
//!
//! ```text
//! ⎡ 0  Aᵀ  Gᵀ ⎤
//! ⎢ A  0   0  ⎥
//! ⎣ G  0  −W² ⎦
//! ```
//!
//! factored as `LDLᵀ` in the order `[z, x, y]` with static regularisation
//! (signs `−, +, −`), dynamic pivot regularisation, and iterative refinement
//! against the unregularised matrix.

use nalgebra::DMatrix;

use super::cones::NtScaling;
use crate::linalg::Vector;

pub struct KktSystem<'a> {
    a: &'a DMatrix<f64>,
    g: &'a DMatrix<f64>,
    n: usize,
    p: usize,
    m: usize,
    static_reg: f64,
    refine_steps: usize,
}

pub struct KktFactor {
    /// Unregularised KKT matrix in `[z, x, y]` order.
    k: DMatrix<f64>,
    /// Unit lower factor, row-major dense.
    l: Vec<f64>,
    d: Vec<f64>,
    dim: usize,
}

const DYN_EPS: f64 = 1e-13;
const DYN_DELTA: f64 = 1e-8;

impl<'a> KktSystem<'a> {
    pub fn new(
        a: &'a DMatrix<f64>,
        g: &'a DMatrix<f64>,
        static_reg: f64,
        refine_steps: usize,
    ) -> Self {
        KktSystem {
            a,
            g,
            n: g.ncols().max(a.ncols()),
            p: a.nrows(),
            m: g.nrows(),
            static_reg,
            refine_steps,
        }
    }

    pub fn factor(&self, w: &NtScaling) -> KktFactor {
        let (n, p, m) = (self.n, self.p, self.m);
        let dim = n + p + m;
        let mut k = DMatrix::zeros(dim, dim);
        // z block
        let (diag, blocks) = w.squared_blocks();
        for i in 0..diag.len() {
            k[(i, i)] = -diag[i];
        }
        for (off, blk) in &blocks {
            for r in 0..blk.nrows() {
                for c in 0..blk.ncols() {
                    k[(off + r, off + c)] = -blk[(r, c)];
                }
            }
        }
        // G coupling (z rows, x cols)
        for i in 0..m {
            for j in 0..n {
                let v = self.g[(i, j)];
                k[(i, m + j)] = v;
                k[(m + j, i)] = v;
            }
        }
        // A coupling (x cols, y rows)
        for i in 0..p {
            for j in 0..n {
                let v = self.a[(i, j)];
                k[(m + n + i, m + j)] = v;
                k[(m + j, m + n + i)] = v;
            }
        }
        let mut signs = vec![-1.0; dim];
        for s in signs.iter_mut().skip(m).take(n) {
            *s = 1.0;
        }
        let mut work: Vec<f64> = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                work.push(k[(r, c)]);
            }
        }
        for i in 0..dim {
            work[i * dim + i] += signs[i] * self.static_reg;
        }
        let (l, d) = ldl(&mut work, dim, &signs);
        KktFactor { k, l, d, dim }
    }

    /// Solves `K [x; y; z] = [rx; ry; rz]`.
    pub fn solve(&self, f: &KktFactor, rx: &Vector, ry: &Vector, rz: &Vector) -> (Vector, Vector, Vector) {
        let (n, p, m) = (self.n, self.p, self.m);
        let mut rhs = Vector::zeros(f.dim);
        rhs.rows_mut(0, m).copy_from(rz);
        rhs.rows_mut(m, n).copy_from(rx);
        rhs.rows_mut(m + n, p).copy_from(ry);
        let mut u = f.solve_reg(&rhs);
        let mut res = &rhs - &f.k * &u;
        let mut res_norm = res.amax();
        for _ in 0..self.refine_steps {
            if res_norm <= 1e-14 * (1.0 + rhs.amax()) {
                break;
            }
            let du = f.solve_reg(&res);
            let cand = &u + du;
            let cand_res = &rhs - &f.k * &cand;
            let cand_norm = cand_res.amax();
            if cand_norm >= res_norm {
                break;
            }
            u = cand;
            res = cand_res;
            res_norm = cand_norm;
        }
        (
            u.rows(m, n).into_owned(),
            u.rows(m + n, p).into_owned(),
            u.rows(0, m).into_owned(),
        )
    }
}

/// In-place `LDLᵀ` without pivoting; pivots with the wrong sign or tiny
/// magnitude are replaced by `sign·DYN_DELTA`.
fn ldl(a: &mut [f64], n: usize, signs: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    for j in 0..n {
        let mut dj = a[j * n + j];
        for k in 0..j {
            let ljk = a[j * n + k];
            dj -= ljk * ljk * d[k];
        }
        if dj * signs[j] <= DYN_EPS {
            dj = signs[j] * DYN_DELTA;
        }
        d[j] = dj;
        for i in (j + 1)..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= a[i * n + k] * a[j * n + k] * d[k];
            }
            a[i * n + j] = v / dj;
        }
    }
    (a.to_vec(), d)
}

impl KktFactor {
    fn solve_reg(&self, b: &Vector) -> Vector {
        let n = self.dim;
        let mut x = b.clone();
        for i in 0..n {
            let mut v = x[i];
            for k in 0..i {
                v -= self.l[i * n + k] * x[k];
            }
            x[i] = v;
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            for k in (i + 1)..n {
                v -= self.l[k * n + i] * x[k];
            }
            x[i] = v;
        }
        x
    }
}
