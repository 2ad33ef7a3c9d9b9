//! The separable and Barenblatt solutions: amplitudes, residuals and mass.

use wfde::exact::*;
use wfde::params::Params;

fn main() -> wfde::Result<()> {
    let fast = Params::new(3, 1.0, 0.0, 0.25, 2.0)?;
    let s = separable(&fast, 1.0)?;
    let sol = Exact::Separable(s);
    println!("separable: c = {:.6}", s.c);
    for (t, r) in [(0.1, 0.3), (0.5, 1.0), (0.9, 2.0)] {
        println!("  t={t} r={r}: U={:.6e} relative residual {:.2e}", s.value(t, r)?, relative_residual(&sol, t, r, 0.1, 4)?);
    }
    let good = Params::new(3, 1.0, 0.0, 0.75, 1.0)?;
    let b = barenblatt(&good, BarenblattChoice::Mass(1.0))?;
    let sol = Exact::Barenblatt(b);
    println!("Barenblatt: a = {:.4}, b = {:.4}, A = {:.6}, D = {:.6}", b.a, b.b, b.a_coef, b.d);
    for t in [0.5, 1.0, 4.0] {
        println!("  t={t}: B(t,0)={:.6} mass={:.10} residual at r=1: {:.2e}", b.value(t, 0.0)?, b.mass_at(t)?, relative_residual(&sol, t, 1.0, 0.1, 3)?);
    }
    Ok(())
}
