//! Trust-region subproblems through the two-block relaxation, checked
//! against the secular equation.
//!
//!     cargo run --example trust_region

use uqcone::conesolver::{solve, SolverOptions};
use uqcone::oracle::trs_secular;
use uqcone::recover::tighten_qcqp;
use uqcone::reformulate::{build_cr, build_ttrs};
use uqcone::{SymMatrix, Vector};

fn trs(name: &str, a: SymMatrix, b: Vector) -> uqcone::Result<()> {
    let inst = uqcone::reformulate::build_trs(&a, &b)?;
    let (prog, meta) = build_cr(&inst)?;
    let res = solve(&prog, &SolverOptions::default())?;
    let (x, _) = tighten_qcqp(&inst, &res, &meta, 1e-9)?;
    let x = match &meta.translation {
        Some(t) => x + t,
        None => x,
    };
    let reference = trs_secular(&a, &b)?;
    println!("{name}");
    println!("  relaxation  {:.9}", meta.original_value(res.objective));
    println!("  secular     {:.9} (hard case: {})", reference.value, reference.hard_case);
    println!("  x           {:?}, ‖x‖ = {:.9}", x.as_slice(), x.norm());
    println!("  xᵀAx + 2bᵀx {:.9}", a.quad_form(&x) + 2.0 * b.dot(&x));
    Ok(())
}

fn main() -> uqcone::Result<()> {
    trs("easy case", SymMatrix::from_diagonal(&[-2.0, 1.0]), Vector::from_row_slice(&[0.5, 0.3]))?;
    // b has no component along the bottom eigenvector
    trs("hard case", SymMatrix::from_diagonal(&[-2.0, 1.0]), Vector::from_row_slice(&[0.0, 0.3]))?;

    // min ½xᵀAx + bᵀx  s.t.  0.5 ≤ ‖x‖² ≤ 2
    let a = SymMatrix::from_diagonal(&[-1.0, 2.0]);
    let b = Vector::from_row_slice(&[0.0, 0.4]);
    let (prog, meta, report) = build_ttrs(&a, &b, 0.5, 2.0)?;
    let res = solve(&prog, &SolverOptions::default())?;
    println!("two-sided trust region");
    println!("  exactness   {} ({})", report.holds, report.reason);
    println!("  relaxation  {:.9}", meta.original_value(res.objective));
    Ok(())
}
