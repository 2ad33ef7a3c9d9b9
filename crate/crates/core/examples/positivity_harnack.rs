//! Instantaneous positivity and the backward, elliptic and forward Harnack quotients.

use wfde::datum::DatumSpec;
use wfde::field::CellField;
use wfde::geometry::Ball;
use wfde::grid::{build_grid, Grading};
use wfde::lab::{harnack_triptych, minimal_life_time, triptych_times, SpaceTime};
use wfde::params::Params;
use wfde::solver::{run_delta_continuation, Boundary, DtPolicy, ProblemSpec, TimeControl};

fn main() -> wfde::Result<()> {
    let p = Params::new(3, 1.0, 0.0, 0.25, 2.0)?;
    let g = build_grid(&p, 0.0, 8.0, 512, Grading::Uniform)?;
    let u0 = DatumSpec::Bump { radius: 1.0, power: 2.0, amplitude: 1.0 }.sample(&p, &g)?;
    let t_star = minimal_life_time(&p, &CellField::new(&g, &u0), &Ball::centered(1.0), 0.05)?;
    let eps = 0.2;
    let times = triptych_times(0.0, t_star, eps);
    let outputs: Vec<f64> = (1..=8).map(|k| t_star * k as f64 / 8.0).chain(times).collect();
    let time = TimeControl { t_end: t_star, dt: DtPolicy::Adaptive { dt0: 1e-8, dt_max: t_star / 50.0 }, output_times: outputs.clone(), record_every: 0 };
    let spec = ProblemSpec::new(p, g, Boundary::Mdp { support: 1.0 }, u0, time)?;
    let cont = run_delta_continuation(&spec, &[4e-3, 2e-3, 1e-3])?;
    let traj = &cont.runs[2];
    println!("t* = {t_star:.4e}");
    for t in outputs.iter().take(8) {
        let (sup, inf) = traj.sup_inf(*t, 2.0)?;
        println!("  t={t:.3e}: sup {sup:.4e} inf {inf:.4e} over B_2");
    }
    for r in harnack_triptych(traj, 1.0, 0.0, t_star, eps, 1e6)? {
        println!("{:<18} sup/inf = {:.4}", r.name, r.measured_constant);
    }
    Ok(())
}
