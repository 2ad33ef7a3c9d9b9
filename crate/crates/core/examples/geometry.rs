//! Weighted ball measures, the intrinsic scale ρ and the scenario sandwich ratios.

use wfde::geometry::*;
use wfde::params::Params;

fn main() -> wfde::Result<()> {
    let p = Params::new(3, 1.0, 0.0, 0.25, 2.0)?;
    println!("μ_γ(B_1(0)) = {:.6} (2π = {:.6})", mu(3, 1.0, &Ball::centered(1.0))?, 2.0 * std::f64::consts::PI);
    for sc in [Scenario::S1, Scenario::S2, Scenario::S3] {
        for b in scenario_balls(sc, 1.0, 2) {
            println!(
                "{sc:?} |x0|={:>6.3}: ρ={:.4} k16={:.4} k17={:.4} k18={:.4} doubling={:.4} A={:.3}",
                b.center_norm,
                rho(&p, &b)?,
                ratio_k16(&p, &b)?,
                ratio_k17(&p, &b)?,
                ratio_k18(&p, &b)?,
                doubling_ratio(&p, &b)?,
                inclusion_factor(&p, &b)?
            );
        }
    }
    let s = 2.5;
    println!("ρ⁻¹_0({s}) = {:.6}", rho_inverse(&p, 0.0, s)?);
    let a = SpaceTimePoint { t: 0.0, x: 0.5 };
    let b = SpaceTimePoint { t: 0.3, x: -0.2 };
    println!("quasi-distance = {:.6}, standard = {:.6}", quasi_distance(&p, a, b)?, standard_quasi_distance(p.sigma(), a, b));
    Ok(())
}
