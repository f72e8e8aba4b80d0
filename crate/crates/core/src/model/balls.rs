use super::{Bound, UqInstance};
use crate::error::{Error, Result};
use crate::linalg::{SymMatrix, Vector};

/// `Ω = ∩_i {x : ‖x − a_i‖ ≤ r_i}`
#[derive(Debug, Clone, PartialEq)]
pub struct BallIntersection {
    centers: Vec<Vector>,
    radii: Vec<f64>,
}

impl BallIntersection {
    pub fn new(centers: Vec<Vector>, radii: Vec<f64>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::InvalidInstance("at least one ball required".into()));
        }
        if centers.len() != radii.len() {
            return Err(Error::InvalidInstance(format!(
                "{} centers but {} radii",
                centers.len(),
                radii.len()
            )));
        }
        let n = centers[0].len();
        if n == 0 {
            return Err(Error::InvalidInstance("n must be positive".into()));
        }
        for (i, c) in centers.iter().enumerate() {
            if c.len() != n || c.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInstance(format!("center {i} malformed")));
            }
        }
        for (i, &r) in radii.iter().enumerate() {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidInstance(format!("radius {i} must be positive")));
            }
        }
        Ok(BallIntersection { centers, radii })
    }

    pub fn n(&self) -> usize {
        self.centers[0].len()
    }

    pub fn p(&self) -> usize {
        self.centers.len()
    }

    pub fn centers(&self) -> &[Vector] {
        &self.centers
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.centers
            .iter()
            .zip(&self.radii)
            .all(|(a, r)| (x - a).norm_squared() <= r * r + tol)
    }

    /// The same balls shifted by `v`.
    pub fn translated(&self, v: &Vector) -> Self {
        BallIntersection {
            centers: self.centers.iter().map(|a| a + v).collect(),
            radii: self.radii.clone(),
        }
    }

    /// `max ‖x − z‖²  s.t.  x ∈ Ω` as a uniform QCQP with `Q = I`.
    pub fn farthest_point_uq(&self, z: &Vector) -> Result<UqInstance> {
        let n = self.n();
        let mut b = vec![-z];
        let mut d = vec![z.norm_squared()];
        let mut bounds = Vec::with_capacity(self.p());
        for (a, r) in self.centers.iter().zip(&self.radii) {
            b.push(-a);
            d.push(a.norm_squared());
            bounds.push(Bound::upper(r * r));
        }
        UqInstance::new(SymMatrix::identity(n), b, d, bounds)
    }
}
