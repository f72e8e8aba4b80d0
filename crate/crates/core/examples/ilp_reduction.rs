//! A binary ILP rewritten as a uniform QCQP: the feasible points of the
//! quadratic problem are exactly the feasible 0/1 vectors.
//!
//!     cargo run --example ilp_reduction

use nalgebra::DMatrix;
use uqcone::model::{enumerate_binary_ilp, ilp_to_uq};
use uqcone::oracle::binary_max_uq;
use uqcone::Vector;

fn main() -> uqcone::Result<()> {
    // max 3x₁ + 4x₂ + 2x₃ + x₄  s.t.  2x₁ + 3x₂ + 2x₃ + x₄ ≤ 5
    let c = Vector::from_row_slice(&[3.0, 4.0, 2.0, 1.0]);
    let a = DMatrix::from_row_slice(1, 4, &[2.0, 3.0, 2.0, 1.0]);
    let rhs = Vector::from_row_slice(&[5.0]);

    let uq = ilp_to_uq(&c, &a, &rhs)?;
    println!("uniform QCQP: n = {}, {} rows", uq.n(), uq.p());

    let (best, x) = enumerate_binary_ilp(&c, &a, &rhs).expect("feasible");
    println!("enumeration   {best} at {:?}", x.as_slice());
    let vertex = binary_max_uq(&uq)?;
    println!("uniform QCQP  {} at {:?}", vertex.value, vertex.argmax.as_slice());

    let half = Vector::from_element(4, 0.5);
    println!("x = ½e feasible for the QCQP: {}", uq.is_feasible(&half, 1e-9));
    Ok(())
}
