//! The interior-point solver on its own: a small linear + second-order cone
//! program.
//!
//!     cargo run --example cone_program

use nalgebra::DMatrix;
use uqcone::conesolver::{solve, ConeProgram, SolverOptions};
use uqcone::Vector;

fn main() -> uqcone::Result<()> {
    // min x + 2y  s.t.  ‖(x − 1, y)‖ ≤ 1,  x + y ≥ 0.5
    let mut prog = ConeProgram::new(2);
    prog.set_objective(Vector::from_row_slice(&[1.0, 2.0]), 0.0)?;
    prog.add_soc(
        DMatrix::identity(2, 2),
        Vector::from_row_slice(&[-1.0, 0.0]),
        Vector::zeros(2),
        1.0,
    )?;
    prog.add_ge(Vector::from_row_slice(&[1.0, 1.0]), 0.5)?;

    let res = solve(&prog, &SolverOptions::default())?;
    println!("status          {:?}", res.status);
    println!("x               {:?}", res.x.as_slice());
    println!("objective       {:.9}", res.objective);
    println!("dual objective  {:.9}", res.dual_objective);
    println!("iterations      {}", res.iterations);
    println!("inequality dual {:?}", res.ineq_duals.as_slice());
    println!("cone dual       {:?}", res.soc_duals[0].as_slice());
    Ok(())
}
