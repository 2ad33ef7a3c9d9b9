//! Local `L^p_γ → L^∞` smoothing and the counterexample calibration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{separable, Exact};
use crate::field::{CellField, RadialField};
use crate::geometry::{mu, Ball};
use crate::grid::{from_edges, WeightedGrid};
use crate::params::Params;
use crate::report::{CheckReport, Context};
use crate::solver::Trajectory;

use super::spacetime::{exact_trajectory, stored};

/// Cells whose center lies at a distance from the origin attained inside `ball`.
pub fn cells_in_ball(grid: &WeightedGrid, ball: &Ball) -> Vec<usize> {
    let (lo, hi) = ball.radial_range();
    (0..grid.len()).filter(|&i| grid.centers[i] >= lo && grid.centers[i] <= hi).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingTerms {
    pub lhs: f64,
    /// `(t−t₀)^{−(N−γ)ϑ_p} (∫_{B_{2R}} u₀^p |x|^{−γ})^{σϑ_p}`.
    pub data: f64,
    /// `((μ_β/μ_γ)(B_R) (t−t₀)/R²)^{1/(1−m)}`.
    pub worst: f64,
}

pub fn smoothing_terms(traj: &Trajectory, ball: &Ball, p: f64, t: f64) -> Result<SmoothingTerms> {
    let params = &traj.params;
    let grid = &traj.grid;
    let outer = ball.scaled(2.0);
    if outer.radial_range().1 > grid.r_max() * (1.0 + 1e-12) {
        return Err(Error::Domain("the doubled ball leaves the computational domain".into()));
    }
    let u0 = traj.initial();
    let dt = t - u0.t;
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("t = {t} must follow the initial time {}", u0.t)));
    }
    let snap = stored(traj, t)?;
    let lhs = cells_in_ball(grid, ball).iter().map(|&i| snap.values[i]).fold(0.0f64, f64::max);
    let n = params.n;
    let st = params.sigma() * params.theta(p);
    let integral = CellField::new(grid, u0).ball_integral(n, params.gamma, &outer, &|u| u.max(0.0).powf(p))?;
    let data = dt.powf(-(params.nf() - params.gamma) * params.theta(p)) * integral.powf(st);
    let ratio = mu(n, params.beta, ball)? / mu(n, params.gamma, ball)?;
    let worst = (ratio * dt / (ball.radius * ball.radius)).powf(1.0 / (1.0 - params.m));
    Ok(SmoothingTerms { lhs, data, worst })
}

/// `sup_{B_R} u(t) ≤ κ₁ A + κ₂ B` evaluated along the ray `κ₁ = κ₂ = constant`.
pub fn check_smoothing(traj: &Trajectory, ball: &Ball, p: f64, t: f64, constant: f64) -> Result<CheckReport> {
    let s = smoothing_terms(traj, ball, p, t)?;
    let ctx = Context::new(&traj.params)
        .ball(*ball)
        .times(&[traj.initial().t, t])
        .grid(traj.grid.id())
        .value("p", p)
        .value("data_term", s.data)
        .value("worst_term", s.worst);
    Ok(CheckReport::scaled("smoothing", s.lhs, s.data + s.worst, constant, ctx))
}

/// Edges `0, ε, …, outer`, geometric with `per_decade` cells per decade above `ε`.
pub fn log_graded_edges(inner: f64, outer: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(inner > 0.0 && inner < outer) || per_decade == 0 {
        return Err(Error::Grading(format!("need 0 < ε < outer, got ε = {inner}, outer = {outer}")));
    }
    let cells = ((outer / inner).log10() * per_decade as f64).ceil().max(4.0) as usize;
    let q = (outer / inner).powf(1.0 / cells as f64);
    let mut e = vec![0.0];
    e.extend((0..=cells).map(|k| if k == cells { outer } else { inner * q.powi(k as i32) }));
    Ok(e)
}

pub const SMOOTHING_EPSILONS: [f64; 5] = [1e-8, 1e-16, 1e-24, 1e-32, 1e-48];
pub const SMOOTHING_PER_DECADE: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingProbe {
    pub label: String,
    pub p: f64,
    /// `(ε, measured constant)` for each innermost edge.
    pub levels: Vec<(f64, f64)>,
    /// False when the last refinement multiplied the measured constant by more than 2.
    pub bounded: bool,
}

impl SmoothingProbe {
    pub fn constant(&self) -> f64 {
        self.levels.iter().map(|x| x.1).fold(0.0, f64::max)
    }
}

/// Measured smoothing constant of a closed-form solution on `B_R(0)` at time `t` from data at `t0`,
/// on log-graded grids with shrinking innermost edge.
pub fn smoothing_probe(label: &str, solution: &Exact, radius: f64, p: f64, t0: f64, t: f64, epsilons: &[f64]) -> Result<SmoothingProbe> {
    let params = solution.params();
    let ball = Ball::centered(radius);
    let mut levels = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let grid = from_edges(params, log_graded_edges(eps * radius, 2.0 * radius, SMOOTHING_PER_DECADE)?)?;
        let traj = exact_trajectory(solution, &grid, &[t0, t])?;
        let s = smoothing_terms(&traj, &ball, p, t)?;
        levels.push((eps, s.lhs / (s.data + s.worst)));
    }
    let bounded = match levels.len() {
        0 | 1 => true,
        k => !(levels[k - 1].1 > 2.0 * levels[k - 2].1) && levels[k - 1].1.is_finite(),
    };
    Ok(SmoothingProbe { label: label.to_string(), p, levels, bounded })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingCalibration {
    pub probes: Vec<SmoothingProbe>,
    /// Max over bounded probes.
    pub constant: f64,
}

/// Multiples of `p_c` probed by the calibration.
pub const SMOOTHING_P_FACTORS: [f64; 8] = [0.6, 0.8, 0.95, 1.05, 1.25, 1.5, 2.0, 3.0];

/// Separable solution with `T = 1` on `B_1(0)` at `t = 1/2` for `p ∈ SMOOTHING_P_FACTORS · p_c`;
/// probes whose constant grows without bound under refinement are excluded.
pub fn calibrate_smoothing(params: &Params, epsilons: &[f64]) -> Result<SmoothingCalibration> {
    let sol = Exact::Separable(separable(params, 1.0)?);
    let pc = params.p_c();
    let mut probes = Vec::new();
    for f in SMOOTHING_P_FACTORS {
        let p = f * pc;
        probes.push(smoothing_probe(&format!("separable p={f}p_c"), &sol, 1.0, p, 0.0, 0.5, epsilons)?);
    }
    let constant = probes.iter().filter(|x| x.bounded).map(SmoothingProbe::constant).fold(0.0, f64::max);
    Ok(SmoothingCalibration { probes, constant })
}
