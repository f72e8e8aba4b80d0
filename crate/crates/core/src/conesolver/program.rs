use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::Vector;

/// Second-order cone constraint `‖A z + b‖ ≤ cᵀz + d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SocBlock {
    pub a: DMatrix<f64>,
    pub b: Vector,
    pub c: Vector,
    pub d: f64,
}

impl SocBlock {
    /// Cone dimension (`1 + rows of A`).
    pub fn dim(&self) -> usize {
        1 + self.a.nrows()
    }

    /// `(cᵀz + d) − ‖A z + b‖`; nonnegative iff `z` satisfies the block.
    pub fn margin(&self, z: &Vector) -> f64 {
        self.c.dot(z) + self.d - (&self.a * z + &self.b).norm()
    }
}

/// Linear + second-order cone program in minimisation form:
///
/// ```text
/// min  cᵀz + offset
/// s.t. G z ≤ h,   E z = f,   ‖A_k z + b_k‖ ≤ c_kᵀz + d_k
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct ConeProgram {
    num_vars: usize,
    objective: Vector,
    offset: f64,
    ineq_rows: Vec<Vector>,
    ineq_rhs: Vec<f64>,
    eq_rows: Vec<Vector>,
    eq_rhs: Vec<f64>,
    soc: Vec<SocBlock>,
}

/// Constraint violations of a point, each measured in absolute terms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Violation {
    /// `max (Gz − h)₊`
    pub ineq: f64,
    /// `max |Ez − f|`
    pub eq: f64,
    /// `max (‖A_k z + b_k‖ − c_kᵀz − d_k)₊`
    pub soc: f64,
}

impl Violation {
    pub fn max(&self) -> f64 {
        self.ineq.max(self.eq).max(self.soc)
    }
}

impl ConeProgram {
    pub fn new(num_vars: usize) -> Self {
        ConeProgram {
            num_vars,
            objective: Vector::zeros(num_vars),
            offset: 0.0,
            ineq_rows: Vec::new(),
            ineq_rhs: Vec::new(),
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
            soc: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn objective(&self) -> &Vector {
        &self.objective
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn ineq_rows(&self) -> &[Vector] {
        &self.ineq_rows
    }

    pub fn ineq_rhs(&self) -> &[f64] {
        &self.ineq_rhs
    }

    pub fn eq_rows(&self) -> &[Vector] {
        &self.eq_rows
    }

    pub fn eq_rhs(&self) -> &[f64] {
        &self.eq_rhs
    }

    pub fn soc_blocks(&self) -> &[SocBlock] {
        &self.soc
    }

    pub fn set_objective(&mut self, c: Vector, offset: f64) -> Result<()> {
        self.check_len("objective", &c)?;
        self.objective = c;
        self.offset = offset;
        Ok(())
    }

    /// Adds `rowᵀz ≤ rhs`, returning the inequality index.
    pub fn add_le(&mut self, row: Vector, rhs: f64) -> Result<usize> {
        self.check_len("inequality row", &row)?;
        check_finite("inequality rhs", rhs)?;
        self.ineq_rows.push(row);
        self.ineq_rhs.push(rhs);
        Ok(self.ineq_rows.len() - 1)
    }

    /// Adds `rowᵀz ≥ rhs` (stored as `−rowᵀz ≤ −rhs`).
    pub fn add_ge(&mut self, row: Vector, rhs: f64) -> Result<usize> {
        self.add_le(-row, -rhs)
    }

    /// Adds `rowᵀz = rhs`, returning the equality index.
    pub fn add_eq(&mut self, row: Vector, rhs: f64) -> Result<usize> {
        self.check_len("equality row", &row)?;
        check_finite("equality rhs", rhs)?;
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
        Ok(self.eq_rows.len() - 1)
    }

    /// Adds `‖A z + b‖ ≤ cᵀz + d`, returning the block index.
    pub fn add_soc(&mut self, a: DMatrix<f64>, b: Vector, c: Vector, d: f64) -> Result<usize> {
        if a.ncols() != self.num_vars {
            return Err(Error::InvalidProgram(format!(
                "cone block has {} columns, program has {} variables",
                a.ncols(),
                self.num_vars
            )));
        }
        if b.len() != a.nrows() {
            return Err(Error::InvalidProgram(format!(
                "cone block offset has length {}, expected {}",
                b.len(),
                a.nrows()
            )));
        }
        self.check_len("cone block linear term", &c)?;
        check_finite("cone block constant", d)?;
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidProgram("non-finite cone block data".into()));
        }
        self.soc.push(SocBlock { a, b, c, d });
        Ok(self.soc.len() - 1)
    }

    /// Adds the convex quadratic constraint `‖R z‖² ≤ wᵀz + w0` in its
    /// rotated-cone form `‖(R z, (wᵀz + w0 − 1)/2)‖ ≤ (wᵀz + w0 + 1)/2`.
    pub fn add_quad_le(&mut self, r: &DMatrix<f64>, w: &Vector, w0: f64) -> Result<usize> {
        let k = r.nrows();
        let mut a = DMatrix::zeros(k + 1, self.num_vars);
        a.view_mut((0, 0), (k, self.num_vars)).copy_from(r);
        for j in 0..self.num_vars {
            a[(k, j)] = 0.5 * w[j];
        }
        let mut b = Vector::zeros(k + 1);
        b[k] = 0.5 * (w0 - 1.0);
        self.add_soc(a, b, w * 0.5, 0.5 * (w0 + 1.0))
    }

    pub fn eval_objective(&self, z: &Vector) -> f64 {
        self.objective.dot(z) + self.offset
    }

    pub fn violation(&self, z: &Vector) -> Violation {
        let ineq = self
            .ineq_rows
            .iter()
            .zip(&self.ineq_rhs)
            .map(|(g, h)| g.dot(z) - h)
            .fold(0.0f64, f64::max);
        let eq = self
            .eq_rows
            .iter()
            .zip(&self.eq_rhs)
            .map(|(e, f)| (e.dot(z) - f).abs())
            .fold(0.0f64, f64::max);
        let soc = self
            .soc
            .iter()
            .map(|blk| -blk.margin(z))
            .fold(0.0f64, f64::max);
        Violation { ineq, eq, soc }
    }

    pub fn is_feasible(&self, z: &Vector, tol: f64) -> bool {
        z.len() == self.num_vars && self.violation(z).max() <= tol
    }

    /// Largest absolute data entry, used to scale tolerances.
    pub fn data_scale(&self) -> f64 {
        let mut s = self.objective.amax();
        for (g, h) in self.ineq_rows.iter().zip(&self.ineq_rhs) {
            s = s.max(g.amax()).max(h.abs());
        }
        for (e, f) in self.eq_rows.iter().zip(&self.eq_rhs) {
            s = s.max(e.amax()).max(f.abs());
        }
        for blk in &self.soc {
            s = s
                .max(blk.a.amax())
                .max(blk.b.amax())
                .max(blk.c.amax())
                .max(blk.d.abs());
        }
        s.max(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_vars == 0 {
            return Err(Error::InvalidProgram("program has no variables".into()));
        }
        let finite = |v: &Vector| v.iter().all(|x| x.is_finite());
        if !finite(&self.objective) || !self.offset.is_finite() {
            return Err(Error::InvalidProgram("non-finite objective".into()));
        }
        if !self.ineq_rows.iter().all(finite) || !self.eq_rows.iter().all(finite) {
            return Err(Error::InvalidProgram("non-finite constraint row".into()));
        }
        Ok(())
    }

    fn check_len(&self, what: &str, v: &Vector) -> Result<()> {
        if v.len() != self.num_vars {
            return Err(Error::InvalidProgram(format!(
                "{what} has length {}, program has {} variables",
                v.len(),
                self.num_vars
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidProgram(format!("{what} has non-finite entries")));
        }
        Ok(())
    }
}

fn check_finite(what: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidProgram(format!("{what} is not finite")))
    }
}
