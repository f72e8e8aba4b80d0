//! Round a relaxation that is not exact into a feasible point with a
//! guaranteed share of the relaxation value.
//!
//!     cargo run --example approx_rounding

use uqcone::recover::approx_uq;
use uqcone::{Bound, SymMatrix, UqInstance, Vector};

fn main() -> uqcone::Result<()> {
    // Farthest point from (0.05, 0.02) inside three unit balls around the
    // vertices of a small triangle. Rows: ‖x − a_i‖² ≤ 1, i.e. b_i = −a_i,
    // d_i = ‖a_i‖². The rounding wants d₀ = 0, so the objective is
    // ‖x − p‖² − ‖p‖².
    let centers = [[0.3, 0.0], [-0.15, 0.26], [-0.15, -0.26]];
    let pull = Vector::from_row_slice(&[-0.05, -0.02]);
    let mut b = vec![pull.clone()];
    let mut d = vec![0.0];
    for a in centers {
        let a = Vector::from_row_slice(&a);
        d.push(a.norm_squared());
        b.push(-a);
    }
    let bounds = vec![Bound::upper(1.0); centers.len()];
    let inst = UqInstance::new(SymMatrix::identity(2), b, d, bounds)?;

    let (x, trace, cert) = approx_uq(&inst, 1e-7)?;
    println!("relaxation value  v    = {:.6}", cert.upper);
    println!("rounded point     x    = {:?}", x.as_slice());
    println!("objective         f0   = {:.6}", cert.lower);
    println!("max violation          = {:.1e}", inst.max_violation(&x));
    println!("gamma                  = {:.6}", cert.gamma);
    println!("guaranteed ratio       = {:.6}", cert.guaranteed_ratio);
    println!("achieved ratio  f0 / v = {:.6}", cert.lower / cert.upper);
    println!("ratio holds            = {}", cert.ratio_holds);
    if trace.shortcut {
        println!("relaxation was already exact");
    } else {
        println!("alpha = {:.6}, tau_bar = {:.6}, j_bar = {}", trace.alpha, trace.tau_bar, trace.j_bar);
    }
    Ok(())
}
