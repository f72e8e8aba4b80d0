//! Chebyshev centre of a ball intersection with a certified bracket on its
//! radius.
//!
//!     cargo run --example chebyshev_center

use uqcone::chebyshev::{chebyshev_certified, gamma_balls};
use uqcone::oracle::grid_minmax_cc;
use uqcone::{BallIntersection, Vector};

fn main() -> uqcone::Result<()> {
    let centers = [[0.6, 0.0], [-0.6, 0.0], [0.0, 0.6], [0.05, -0.6]];
    let radii = vec![1.0, 1.0, 1.1, 1.0];
    let balls = BallIntersection::new(centers.iter().map(|c| Vector::from_row_slice(c)).collect(), radii)?;

    let g = gamma_balls(&balls)?;
    println!("gamma = {:.6} at {:?} (nonempty interior: {})", g.gamma, g.point.as_slice(), g.nonempty);

    let res = chebyshev_certified(&balls, 1e-6)?;
    println!("centre            {:?}", res.center.as_slice());
    println!("weights           {:?}", res.lambda);
    println!("bracket           {:.6} <= max ||x - c||² <= {:.6}", res.lower, res.upper);
    println!("relaxation value  {:.6}", res.v_dcc);
    println!("guaranteed ratio  {:.6} (holds: {})", res.guaranteed_ratio, res.ratio_holds);

    // brute force in the plane: sample the boundary, then take the smallest
    // enclosing ball of the samples
    let grid = grid_minmax_cc(&balls, 1e-3)?;
    println!("grid min-max      {:.6} at {:?}", grid.value, grid.center.as_slice());
    Ok(())
}
