//! Product cone `R₊^l × Q^{q₁} × … × Q^{q_k}` and its Nesterov–Todd scaling.
//!
//! For a second-order cone `Q = {(u₀, u₁) : u₀ ≥ ‖u₁‖}` the Jordan product is
//! `u ∘ v = (uᵀv, u₀v₁ + v₀u₁)` with identity `e = (1, 0, …, 0)`.

use nalgebra::DMatrix;

use crate::linalg::Vector;

#[derive(Debug, Clone, PartialEq)]
pub struct ConeLayout {
    pub linear: usize,
    pub soc: Vec<usize>,
}

impl ConeLayout {
    pub fn dim(&self) -> usize {
        self.linear + self.soc.iter().sum::<usize>()
    }

    /// Barrier degree `l + k`.
    pub fn degree(&self) -> usize {
        self.linear + self.soc.len()
    }

    /// Start offsets of the SOC blocks.
    pub fn soc_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = self.linear;
        self.soc
            .iter()
            .map(|&q| {
                let r = start..start + q;
                start += q;
                r
            })
            .collect()
    }

    pub fn identity(&self) -> Vector {
        let mut e = Vector::zeros(self.dim());
        for i in 0..self.linear {
            e[i] = 1.0;
        }
        for r in self.soc_ranges() {
            e[r.start] = 1.0;
        }
        e
    }

    /// Smallest spectral value of `u` over all blocks (`min u_i`, `u₀ − ‖u₁‖`).
    pub fn min_eig(&self, u: &Vector) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.linear {
            m = m.min(u[i]);
        }
        for r in self.soc_ranges() {
            let tail = u.rows(r.start + 1, r.len() - 1).norm();
            m = m.min(u[r.start] - tail);
        }
        m
    }

    /// `u ∘ v`
    pub fn jordan(&self, u: &Vector, v: &Vector) -> Vector {
        let mut w = Vector::zeros(u.len());
        for i in 0..self.linear {
            w[i] = u[i] * v[i];
        }
        for r in self.soc_ranges() {
            let (s, q) = (r.start, r.len());
            w[s] = u.rows(s, q).dot(&v.rows(s, q));
            for k in 1..q {
                w[s + k] = u[s] * v[s + k] + v[s] * u[s + k];
            }
        }
        w
    }

    /// Solves `λ ∘ u = d` for `u`.
    pub fn jordan_div(&self, lambda: &Vector, d: &Vector) -> Vector {
        let mut u = Vector::zeros(d.len());
        for i in 0..self.linear {
            u[i] = d[i] / lambda[i];
        }
        for r in self.soc_ranges() {
            let (s, q) = (r.start, r.len());
            let l0 = lambda[s];
            let l1 = lambda.rows(s + 1, q - 1);
            let d1 = d.rows(s + 1, q - 1);
            let det = l0 * l0 - l1.norm_squared();
            let u0 = (l0 * d[s] - l1.dot(&d1)) / det;
            u[s] = u0;
            for k in 1..q {
                u[s + k] = (d[s + k] - u0 * lambda[s + k]) / l0;
            }
        }
        u
    }

    /// Largest `α` with `u + α d` in the cone (may be `+∞`). `u` must be interior.
    pub fn max_step(&self, u: &Vector, d: &Vector) -> f64 {
        let mut alpha = f64::INFINITY;
        for i in 0..self.linear {
            if d[i] < 0.0 {
                alpha = alpha.min(-u[i] / d[i]);
            }
        }
        for r in self.soc_ranges() {
            let (s, q) = (r.start, r.len());
            let uk = u.rows(s, q);
            let dk = d.rows(s, q);
            let jn2 = uk[0] * uk[0] - uk.rows(1, q - 1).norm_squared();
            if jn2 <= 0.0 {
                return 0.0;
            }
            let jn = jn2.sqrt();
            let ubar = uk / jn;
            let ubar_jd = ubar[0] * dk[0] - ubar.rows(1, q - 1).dot(&dk.rows(1, q - 1));
            let rho0 = ubar_jd / jn;
            let factor = (ubar_jd + dk[0]) / (ubar[0] + 1.0);
            let mut rho1 = 0.0;
            for k in 1..q {
                let v = (dk[k] - factor * ubar[k]) / jn;
                rho1 += v * v;
            }
            let step = rho1.sqrt() - rho0;
            if step > 0.0 {
                alpha = alpha.min(1.0 / step);
            }
        }
        alpha
    }
}

/// NT scaling `W` with `W z = W⁻¹ s = λ`. All blocks are symmetric.
#[derive(Debug, Clone)]
pub struct NtScaling {
    linear: Vector,
    soc: Vec<SocScaling>,
    layout: ConeLayout,
}

#[derive(Debug, Clone)]
struct SocScaling {
    eta: f64,
    w: Vector,
}

impl NtScaling {
    pub fn identity(layout: &ConeLayout) -> Self {
        let soc = layout
            .soc
            .iter()
            .map(|&q| {
                let mut w = Vector::zeros(q);
                w[0] = 1.0;
                SocScaling { eta: 1.0, w }
            })
            .collect();
        NtScaling {
            linear: Vector::from_element(layout.linear, 1.0),
            soc,
            layout: layout.clone(),
        }
    }

    /// Returns `None` if `s` or `z` is not strictly interior.
    pub fn new(layout: &ConeLayout, s: &Vector, z: &Vector) -> Option<Self> {
        let mut linear = Vector::zeros(layout.linear);
        for i in 0..layout.linear {
            if s[i] <= 0.0 || z[i] <= 0.0 {
                return None;
            }
            linear[i] = (s[i] / z[i]).sqrt();
        }
        let mut soc = Vec::with_capacity(layout.soc.len());
        for r in layout.soc_ranges() {
            let (st, q) = (r.start, r.len());
            let sk = s.rows(st, q);
            let zk = z.rows(st, q);
            let sjs = sk[0] * sk[0] - sk.rows(1, q - 1).norm_squared();
            let zjz = zk[0] * zk[0] - zk.rows(1, q - 1).norm_squared();
            if !(sjs > 0.0 && zjz > 0.0 && sk[0] > 0.0 && zk[0] > 0.0) {
                return None;
            }
            let sbar = sk / sjs.sqrt();
            let zbar = zk / zjz.sqrt();
            let gamma = ((1.0 + sbar.dot(&zbar)) / 2.0).sqrt();
            let mut w = Vector::zeros(q);
            w[0] = (sbar[0] + zbar[0]) / (2.0 * gamma);
            for k in 1..q {
                w[k] = (sbar[k] - zbar[k]) / (2.0 * gamma);
            }
            let eta = (sjs / zjz).powf(0.25);
            soc.push(SocScaling { eta, w });
        }
        Some(NtScaling {
            linear,
            soc,
            layout: layout.clone(),
        })
    }

    fn apply(&self, v: &Vector, inverse: bool) -> Vector {
        let mut out = Vector::zeros(v.len());
        for i in 0..self.layout.linear {
            out[i] = if inverse {
                v[i] / self.linear[i]
            } else {
                v[i] * self.linear[i]
            };
        }
        for (sc, r) in self.soc.iter().zip(self.layout.soc_ranges()) {
            let (st, q) = (r.start, r.len());
            let w0 = sc.w[0];
            let w1 = sc.w.rows(1, q - 1);
            let (sign, scale) = if inverse {
                (-1.0, 1.0 / sc.eta)
            } else {
                (1.0, sc.eta)
            };
            let v0 = v[st];
            let v1 = v.rows(st + 1, q - 1);
            let w1v1 = w1.dot(&v1);
            out[st] = scale * (w0 * v0 + sign * w1v1);
            let coef = sign * v0 + w1v1 / (1.0 + w0);
            for k in 1..q {
                out[st + k] = scale * (v[st + k] + coef * sc.w[k]);
            }
        }
        out
    }

    pub fn mul(&self, v: &Vector) -> Vector {
        self.apply(v, false)
    }

    pub fn inv_mul(&self, v: &Vector) -> Vector {
        self.apply(v, true)
    }

    /// Dense `W²` block by block, as `(offset, matrix)` pairs; the linear
    /// part is returned as a diagonal.
    pub fn squared_blocks(&self) -> (Vector, Vec<(usize, DMatrix<f64>)>) {
        let diag = self.linear.map(|w| w * w);
        let blocks = self
            .soc
            .iter()
            .zip(self.layout.soc_ranges())
            .map(|(sc, r)| {
                let q = r.len();
                let w0 = sc.w[0];
                let mut m = DMatrix::zeros(q, q);
                m[(0, 0)] = w0;
                for k in 1..q {
                    m[(0, k)] = sc.w[k];
                    m[(k, 0)] = sc.w[k];
                    for l in 1..q {
                        m[(k, l)] = sc.w[k] * sc.w[l] / (1.0 + w0) + if k == l { 1.0 } else { 0.0 };
                    }
                }
                m *= sc.eta;
                (r.start, &m * &m)
            })
            .collect();
        (diag, blocks)
    }
}
