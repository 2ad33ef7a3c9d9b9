//! Both sides of the local estimates evaluated on exact and numerical solutions.

pub mod checks;
pub mod energy;
pub mod harnack;
pub mod hp;
pub mod ledger;
pub mod smoothing;
pub mod spacetime;

pub use checks::*;
pub use energy::*;
pub use harnack::*;
pub use hp::*;
pub use ledger::*;
pub use smoothing::*;
pub use spacetime::*;
