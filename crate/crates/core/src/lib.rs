//! Simulation and verification laboratory for the weighted fast diffusion equation
//!
//! ```text
//! u_t = |x|^γ ∇·(|x|^{−β} ∇u^m),   N ≥ 3,  0 < m < 1.
//! ```
//!
//! The crate computes the intrinsic geometry of the two power weights, closed-form
//! reference solutions, radial finite-volume solutions of the Dirichlet and zero-flux
//! problems, and evaluates both sides of the local estimates (smoothing, positivity,
//! Harnack, Hölder, extinction and functional inequalities) with measured constants.

pub mod cli;
pub mod datum;
pub mod error;
pub mod exact;
pub mod field;
pub mod geometry;
pub mod grid;
pub mod inequalities;
pub mod io;
pub mod lab;
pub mod params;
pub mod quadrature;
pub mod report;
pub mod solver;

pub use error::{Error, Result};
