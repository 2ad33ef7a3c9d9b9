//! Weighted Sobolev, Poincaré and John–Nirenberg quantities on the probe families.

use wfde::field::FnField;
use wfde::geometry::Ball;
use wfde::inequalities::*;
use wfde::params::Params;

fn main() -> wfde::Result<()> {
    let flat = Params::new(3, 0.0, 0.0, 0.5, 1.0)?;
    let at = TestFunction::new(Profile::AubinTalenti { scale: 1.0, exponent: 0.5 });
    println!("unweighted Aubin–Talenti ratio: {:.6}", ckn_ratio(&flat, &at)?);
    let p = Params::new(3, 1.0, 0.0, 0.25, 2.0)?;
    let ball = Ball::centered(1.0);
    let mut s = 0.0f64;
    let mut pc = 0.0f64;
    for f in ball_probes(&p, 1.0) {
        s = s.max(ckn_on_ball(&p, &f, &ball, 1.0)?.measured_constant);
        pc = pc.max(poincare_on_ball(&p, &f, &ball, 1.0)?.measured_constant);
    }
    println!("ball Sobolev constant {s:.4}, Poincaré constant {pc:.4}");
    let log = FnField(|r: f64| r.ln());
    let bmo = bmo_gamma(&p, &log, &ball, 5)?;
    println!("‖log r‖_BMO = {:.4} over {} sub-balls", bmo.bmo_norm, bmo.balls.len());
    println!("κ6 = {:.4}", john_nirenberg_kappa6(&p, &log, &ball, 5, 2.0)?);
    let k13 = kappa13(&p, 2.0, 400)?;
    println!("κ13 = {:.4} (s = {:.4}, {} iterations)", k13.value, k13.s, k13.iterations);
    println!("probe manifest {}", probe_manifest_hash(&p));
    Ok(())
}
