//! Grid refinement against the separable solution prescribed on an annulus.

use wfde::exact::{sample, separable, Exact};
use wfde::grid::{build_grid, Grading};
use wfde::params::Params;
use wfde::solver::{run, Boundary, DtPolicy, ProblemSpec, TimeControl};

fn main() -> wfde::Result<()> {
    let p = Params::new(3, 1.0, 0.0, 0.25, 2.0)?;
    let exact = Exact::Separable(separable(&p, 1.0)?);
    let t_end = 0.1;
    let mut prev: Option<f64> = None;
    for cells in [32, 64, 128] {
        let g = build_grid(&p, 0.25, 1.0, cells, Grading::Uniform)?;
        let h = 0.75 / cells as f64;
        let time = TimeControl { t_end, dt: DtPolicy::Fixed(0.5 * h * h), output_times: vec![t_end], record_every: 0 };
        let mut spec = ProblemSpec::new(p, g.clone(), Boundary::ExactTrace(exact), sample(&exact, &g, 0.0)?, time)?;
        spec.extinction.stop = false;
        let traj = run(&spec)?;
        let want = sample(&exact, &g, t_end)?;
        let err = traj.nearest(t_end).values.iter().zip(&want.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        match prev {
            Some(e) => println!("{cells:>4} cells: L∞ error {err:.3e}, order {:.3}", (e / err).log2()),
            None => println!("{cells:>4} cells: L∞ error {err:.3e}"),
        }
        prev = Some(err);
    }
    Ok(())
}
