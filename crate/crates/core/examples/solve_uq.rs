//! Relax a uniform QCQP, check whether the relaxation is exact and, when it
//! is, pull an optimal point out of it.
//!
//!     cargo run --example solve_uq

use uqcone::conesolver::{certify_strong_duality, solve, SolverOptions};
use uqcone::recover::tighten_uq;
use uqcone::reformulate::{build_socp_uq, check_as3};
use uqcone::{Bound, SymMatrix, UqInstance, Vector};

fn v(xs: &[f64]) -> Vector {
    Vector::from_row_slice(xs)
}

fn report(name: &str, inst: &UqInstance) -> uqcone::Result<()> {
    let (prog, meta) = build_socp_uq(inst)?;
    let res = solve(&prog, &SolverOptions::default())?;
    let value = meta.original_value(res.objective);
    let as3 = check_as3(inst, 1e-8);
    let dual = certify_strong_duality(inst, &res)?;
    println!("{name}");
    println!("  relaxation value  {value:.9}  ({} iterations)", res.iterations);
    println!("  dual value        {:.9}  gap {:.1e}", dual.dual_value, dual.gap);
    println!("  exactness         {} ({})", if as3.holds { "certified" } else { "not certified" }, as3.reason);
    if as3.holds {
        let (x, trace) = tighten_uq(inst, &res, 1e-9)?;
        println!("  recovered x       {:?}", x.as_slice());
        println!("  f0(x)             {:.9}  max violation {:.1e}", inst.objective(&x), inst.max_violation(&x));
        println!("  tightening        {:?}, {} step(s)", trace.case, trace.steps.len());
    }
    Ok(())
}

fn main() -> uqcone::Result<()> {
    // max x²  s.t.  1 ≤ x² + 2x ≤ 3,  −1 ≤ x² − 2x ≤ 3
    // The optimum is 1 (at x = 1); the relaxation overshoots to 3.
    let tiny = UqInstance::new(
        SymMatrix::identity(1),
        vec![v(&[0.0]), v(&[1.0]), v(&[-1.0])],
        vec![0.0, 0.0, 0.0],
        vec![Bound::range(1.0, 3.0), Bound::range(-1.0, 3.0)],
    )?;
    report("two-row instance on the line", &tiny)?;

    // Farthest point from the origin in the lens ‖x‖ ≤ 1, ‖x − (½, 0)‖ ≤ 1.
    // The linear data spans one direction of the plane, so the relaxation is
    // exact, but the solver lands strictly inside the cone and the point has
    // to be pushed out to the boundary.
    let lens = UqInstance::new(
        SymMatrix::identity(2),
        vec![v(&[0.0, 0.0]), v(&[0.0, 0.0]), v(&[-0.5, 0.0])],
        vec![0.0, 0.0, 0.25],
        vec![Bound::upper(1.0), Bound::upper(1.0)],
    )?;
    report("lens", &lens)?;
    Ok(())
}
