//! Energy and Caccioppoli estimates with discrete gradients on cell edges.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{h_sigma, radial_ball_integral, Ball};
use crate::grid::{Snapshot, WeightedGrid};
use crate::report::{CheckReport, Context};
use crate::solver::Trajectory;

use super::spacetime::{stored, time_window};

/// Radii `R₁ < R` (balls centered at the origin) and times `T₀ < T₁ < T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyWindow {
    pub r1: f64,
    pub r: f64,
    pub t0: f64,
    pub t1: f64,
    pub t_end: f64,
}

impl EnergyWindow {
    fn validate(&self, grid: &WeightedGrid) -> Result<()> {
        if !(0.0 < self.r1 && self.r1 < self.r && self.r <= grid.r_max() * (1.0 + 1e-12)) {
            return Err(Error::Domain(format!("need 0 < R₁ < R ≤ R₀, got R₁ = {}, R = {}", self.r1, self.r)));
        }
        if !(self.t0 < self.t1 && self.t1 < self.t_end) {
            return Err(Error::Domain("need T₀ < T₁ < T".into()));
        }
        Ok(())
    }
}

/// `Σ τ_{i+1/2} (g_{i+1} − g_i)² ψ(r_{i+1/2})²` over edges inside `|x| ≤ radius`.
fn edge_energy(grid: &WeightedGrid, g: &[f64], radius: f64, psi: &dyn Fn(f64) -> f64) -> f64 {
    (0..grid.len() - 1)
        .filter(|&i| grid.edges[i + 1] <= radius * (1.0 + 1e-12))
        .map(|i| {
            let s = psi(grid.edges[i + 1]);
            grid.trans[i] * (g[i + 1] - g[i]).powi(2) * s * s
        })
        .sum()
}

fn cell_integral(grid: &WeightedGrid, snap: &Snapshot, radius: f64, g: &dyn Fn(f64, f64) -> f64) -> f64 {
    let w = grid.truncated_gamma_weights(radius);
    w.iter().zip(&snap.values).zip(&grid.centers).map(|((w, &u), &r)| if *w > 0.0 { w * g(u, r) } else { 0.0 }).sum()
}

fn require_positive(snaps: &[&Snapshot], radius: f64, grid: &WeightedGrid) -> Result<()> {
    for s in snaps {
        if s.inf_within(grid, radius) <= 0.0 {
            return Err(Error::Regularity(format!("solution not bounded away from zero at t = {}", s.t)));
        }
    }
    Ok(())
}

fn geometric_factor(traj: &Trajectory, w: &EnergyWindow) -> Result<f64> {
    let sigma = traj.params.sigma();
    Ok(h_sigma(sigma, w.r, w.r1, 0.0)? / (w.r - w.r1).powf(sigma))
}

fn context(traj: &Trajectory, w: &EnergyWindow, p: f64) -> Context {
    Context::new(&traj.params)
        .ball(Ball::centered(w.r))
        .times(&[w.t0, w.t1, w.t_end])
        .grid(traj.grid.id())
        .value("r1", w.r1)
        .value("p", p)
}

/// Energy estimate for subsolutions, `p > 1`:
///
/// ```text
/// sup_{[T₁,T]} ∫_{B_{R₁}} u^p + ∫_{T₁}^T ∫_{B_{R₁}} |∇u^{(p+m−1)/2}|² |x|^{−β}
///     ≤ c₁ [h_σ/(R−R₁)^σ + 1/(T₁−T₀)] ∫_{T₀}^T ∫_{B_R} (u^{p+m−1} + u^p)
/// ```
pub fn check_energy_upper(traj: &Trajectory, w: &EnergyWindow, p: f64, c1: f64) -> Result<CheckReport> {
    if !(p > 1.0) {
        return Err(Error::Regularity(format!("the upper energy estimate needs p > 1, got {p}")));
    }
    w.validate(&traj.grid)?;
    let m = traj.params.m;
    let e = (p + m - 1.0) / 2.0;
    let g = &traj.grid;
    let (late, lw) = time_window(traj, w.t1, w.t_end)?;
    let sup = late.iter().map(|s| cell_integral(g, s, w.r1, &|u, _| u.max(0.0).powf(p))).fold(0.0, f64::max);
    let grad: f64 = late
        .iter()
        .zip(&lw)
        .map(|(s, wt)| {
            let v: Vec<f64> = s.values.iter().map(|u| u.max(0.0).powf(e)).collect();
            wt * edge_energy(g, &v, w.r1, &|_| 1.0)
        })
        .sum();
    let (all, aw) = time_window(traj, w.t0, w.t_end)?;
    let mass: f64 = all
        .iter()
        .zip(&aw)
        .map(|(s, wt)| wt * cell_integral(g, s, w.r, &|u, _| u.max(0.0).powf(p + m - 1.0) + u.max(0.0).powf(p)))
        .sum();
    let base = (geometric_factor(traj, w)? + 1.0 / (w.t1 - w.t0)) * mass;
    let ctx = context(traj, w, p).value("sup_term", sup).value("gradient_term", grad);
    Ok(CheckReport::scaled("energy_upper", sup + grad, base, c1, ctx))
}

/// Energy estimate for supersolutions `u ≥ δ > 0` with `0 < p < 1−m`:
///
/// ```text
/// ∫_{B_{R₁}} u(T₀)^p + ∫_{T₀}^{T₁} ∫_{B_{R₁}} |∇u^{(p+m−1)/2}|² |x|^{−β}
///     ≤ c₂ [h_σ/(R−R₁)^σ + 1/(T−T₁)] ∫_{T₀}^T ∫_{B_R} (u^{p+m−1} + u^p)
/// ```
pub fn check_energy_intermediate(traj: &Trajectory, w: &EnergyWindow, p: f64, c2: f64) -> Result<CheckReport> {
    let m = traj.params.m;
    if !(p > 0.0 && p < 1.0 - m) {
        return Err(Error::Regularity(format!("this energy estimate needs 0 < p < 1−m = {}, got {p}", 1.0 - m)));
    }
    w.validate(&traj.grid)?;
    let g = &traj.grid;
    let e = (p + m - 1.0) / 2.0;
    let (all, aw) = time_window(traj, w.t0, w.t_end)?;
    require_positive(&all, w.r, g)?;
    let first = stored(traj, w.t0)?;
    let head = cell_integral(g, first, w.r1, &|u, _| u.powf(p));
    let (early, ew) = time_window(traj, w.t0, w.t1)?;
    let grad: f64 = early
        .iter()
        .zip(&ew)
        .map(|(s, wt)| {
            let v: Vec<f64> = s.values.iter().map(|u| u.powf(e)).collect();
            wt * edge_energy(g, &v, w.r1, &|_| 1.0)
        })
        .sum();
    let mass: f64 = all.iter().zip(&aw).map(|(s, wt)| wt * cell_integral(g, s, w.r, &|u, _| u.powf(p + m - 1.0) + u.powf(p))).sum();
    let base = (geometric_factor(traj, w)? + 1.0 / (w.t_end - w.t1)) * mass;
    let ctx = context(traj, w, p).value("initial_term", head).value("gradient_term", grad);
    Ok(CheckReport::scaled("energy_intermediate", head + grad, base, c2, ctx))
}

/// Energy estimate for negative powers, supersolutions `u ≥ δ > 0`, `p > 0`:
///
/// ```text
/// sup_{[T₁,T]} ∫_{B_{R₁}} u^{−p} + ∫_{T₁}^T ∫_{B_{R₁}} |∇u^{(−p+m−1)/2}|² |x|^{−β}
///     ≤ c₃ [h_σ/(R−R₁)^σ + 1/(T₁−T₀)] ∫_{T₀}^T ∫_{B_R} (u^{−p+m−1} + u^{−p})
/// ```
pub fn check_energy_lower(traj: &Trajectory, w: &EnergyWindow, p: f64, c3: f64) -> Result<CheckReport> {
    if !(p > 0.0) {
        return Err(Error::Regularity(format!("the lower energy estimate needs p > 0, got {p}")));
    }
    w.validate(&traj.grid)?;
    let m = traj.params.m;
    let g = &traj.grid;
    let e = (-p + m - 1.0) / 2.0;
    let (all, aw) = time_window(traj, w.t0, w.t_end)?;
    require_positive(&all, w.r, g)?;
    let (late, lw) = time_window(traj, w.t1, w.t_end)?;
    let sup = late.iter().map(|s| cell_integral(g, s, w.r1, &|u, _| u.powf(-p))).fold(0.0, f64::max);
    let grad: f64 = late
        .iter()
        .zip(&lw)
        .map(|(s, wt)| {
            let v: Vec<f64> = s.values.iter().map(|u| u.powf(e)).collect();
            wt * edge_energy(g, &v, w.r1, &|_| 1.0)
        })
        .sum();
    let mass: f64 = all.iter().zip(&aw).map(|(s, wt)| wt * cell_integral(g, s, w.r, &|u, _| u.powf(-p + m - 1.0) + u.powf(-p))).sum();
    let base = (geometric_factor(traj, w)? + 1.0 / (w.t1 - w.t0)) * mass;
    let ctx = context(traj, w, p).value("sup_term", sup).value("gradient_term", grad);
    Ok(CheckReport::scaled("energy_lower", sup + grad, base, c3, ctx))
}

/// Cut-off equal to 1 on `[0, r1]`, 0 from `r` on, quintic smoothstep in between.
/// Returns `(ψ, ψ')`.
pub fn caccioppoli_cutoff(r1: f64, r: f64, x: f64) -> (f64, f64) {
    if x <= r1 {
        return (1.0, 0.0);
    }
    if x >= r {
        return (0.0, 0.0);
    }
    let z = (x - r1) / (r - r1);
    let s = z * z * z * (10.0 - 15.0 * z + 6.0 * z * z);
    let ds = 30.0 * z * z * (1.0 - z) * (1.0 - z) / (r - r1);
    (1.0 - s, -ds)
}

/// Caccioppoli estimate for supersolutions `u ≥ δ > 0`, `τ < t`:
///
/// ```text
/// ∫ u(τ)^{1−m} ψ² + (m²/2)(1−m) ∫_τ^t ∫ ψ² |∇log u|² |x|^{−β}
///     ≤ C · 2(1−m) ∫_τ^t ∫ |∇ψ|² |x|^{−β} + ∫ u(t)^{1−m} ψ²
/// ```
///
/// with `C = 1` in the stated form and `ψ` the smoothstep cut-off between `R₁` and `R`.
pub fn check_caccioppoli(traj: &Trajectory, r1: f64, r: f64, tau: f64, t: f64, constant: f64) -> Result<CheckReport> {
    let w = EnergyWindow { r1, r, t0: tau, t1: 0.5 * (tau + t), t_end: t };
    w.validate(&traj.grid)?;
    let p = &traj.params;
    let m = p.m;
    let g = &traj.grid;
    let (all, aw) = time_window(traj, tau, t)?;
    require_positive(&all, r, g)?;
    let psi = |x: f64| caccioppoli_cutoff(r1, r, x).0;
    let weighted = |s: &Snapshot| cell_integral(g, s, r, &|u, x| u.powf(1.0 - m) * psi(x).powi(2));
    let early = weighted(stored(traj, tau)?);
    let late = weighted(stored(traj, t)?);
    let grad_log: f64 = all
        .iter()
        .zip(&aw)
        .map(|(s, wt)| {
            let v: Vec<f64> = s.values.iter().map(|u| u.ln()).collect();
            wt * edge_energy(g, &v, r, &psi)
        })
        .sum();
    let grad_psi = radial_ball_integral(p.n, p.beta, &Ball::centered(r), |x| caccioppoli_cutoff(r1, r, x).1.powi(2), &[r1])?;
    let lhs = early + 0.5 * m * m * (1.0 - m) * grad_log;
    let base = 2.0 * (1.0 - m) * grad_psi * (t - tau);
    let ctx = context(traj, &w, 1.0 - m).value("gradient_log", grad_log);
    Ok(CheckReport::affine("caccioppoli", lhs, late, base, constant, ctx))
}
