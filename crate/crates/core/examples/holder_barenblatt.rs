//! Hölder exponent of the Barenblatt solution at the origin, for σ below and at 2.

use wfde::exact::{barenblatt, BarenblattChoice, Exact};
use wfde::lab::{holder_exponent, ExactField};
use wfde::params::Params;

fn main() -> wfde::Result<()> {
    for (gamma, beta) in [(1.5, 0.0), (1.0, 0.0), (0.0, 0.0)] {
        let m = 0.9;
        let p = Params::new(3, gamma, beta, m, 1.0)?;
        let b = barenblatt(&p, BarenblattChoice::D(1.0))?;
        let field = ExactField::new(Exact::Barenblatt(b));
        let fit = holder_exponent(&field, 1.0, 0.0, b.value(1.0, 0.0)?, 1e-4, 6)?;
        println!("σ = {:.2}: fitted exponent {:?}", p.sigma(), fit.exponent);
    }
    Ok(())
}
