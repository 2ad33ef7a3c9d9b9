//! The separable solution violates the smoothing estimate below p_c and satisfies it above.

use wfde::exact::{separable, Exact};
use wfde::geometry::Ball;
use wfde::grid::{build_grid, Grading};
use wfde::lab::{check_smoothing, exact_trajectory};
use wfde::params::Params;

fn main() -> wfde::Result<()> {
    let p = Params::new(3, 1.0, 0.0, 0.25, 2.0)?;
    let sol = Exact::Separable(separable(&p, 1.0)?);
    let g = build_grid(&p, 0.0, 2.0, 400, Grading::Geometric(1.02))?;
    let traj = exact_trajectory(&sol, &g, &[0.0, 0.5])?;
    println!("p_c = {}", p.p_c());
    for f in [0.6, 0.8, 0.95, 1.05, 1.5, 2.0] {
        let q = f * p.p_c();
        let r = check_smoothing(&traj, &Ball::centered(1.0), q, 0.5, 1.0)?;
        println!("p = {q:.3}: sup {:.3e} vs rhs {:.3e} -> {}", r.lhs, r.rhs, if r.pass { "pass" } else { "fail" });
    }
    Ok(())
}
