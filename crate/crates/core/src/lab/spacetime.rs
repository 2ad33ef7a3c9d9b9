//! Uniform access to solutions given in closed form or as stored trajectories.

use crate::error::{Error, Result};
use crate::exact::{sample, Exact};
use crate::grid::{Snapshot, WeightedGrid};
use crate::params::Params;
use crate::solver::Trajectory;

/// Minimal number of cells inside any ball probed by a sup/inf.
pub const MIN_CELLS_IN_BALL: usize = 16;

pub trait SpaceTime: Sync {
    fn params(&self) -> &Params;

    fn value(&self, t: f64, r: f64) -> Result<f64>;

    /// `(sup, inf)` of `u(t, ·)` over `|x| ≤ radius`.
    fn sup_inf(&self, t: f64, radius: f64) -> Result<(f64, f64)>;
}

impl SpaceTime for Trajectory {
    fn params(&self) -> &Params {
        &self.params
    }

    /// Piecewise constant in `r`, linear in `t` between stored snapshots.
    fn value(&self, t: f64, r: f64) -> Result<f64> {
        let g = &self.grid;
        if r < g.r_min() || r > g.r_max() {
            return Err(Error::Domain(format!("r = {r} outside the grid")));
        }
        let i = g.edges.partition_point(|&e| e <= r).saturating_sub(1).min(g.len() - 1);
        let (a, b) = bracket(self, t)?;
        if a.t == b.t {
            return Ok(a.values[i]);
        }
        let w = (t - a.t) / (b.t - a.t);
        Ok((1.0 - w) * a.values[i] + w * b.values[i])
    }

    fn sup_inf(&self, t: f64, radius: f64) -> Result<(f64, f64)> {
        let snap = stored(self, t)?;
        let cells: Vec<usize> = self.grid.cells_within(radius).collect();
        if cells.len() < MIN_CELLS_IN_BALL {
            return Err(Error::Grading(format!(
                "{} cells inside radius {radius}, need at least {MIN_CELLS_IN_BALL}",
                cells.len()
            )));
        }
        let vals = cells.iter().map(|&i| snap.values[i]);
        Ok(vals.fold((f64::NEG_INFINITY, f64::INFINITY), |(s, i), v| (s.max(v), i.min(v))))
    }
}

/// Snapshot stored at `t`.
pub fn stored(traj: &Trajectory, t: f64) -> Result<&Snapshot> {
    traj.at(t).ok_or_else(|| Error::Domain(format!("no snapshot stored at t = {t}")))
}

fn bracket(traj: &Trajectory, t: f64) -> Result<(&Snapshot, &Snapshot)> {
    let s = &traj.snapshots;
    if let Some(x) = traj.at(t) {
        return Ok((x, x));
    }
    let k = s.partition_point(|x| x.t <= t);
    if k == 0 || k == s.len() {
        return Err(Error::Domain(format!("t = {t} outside the stored times")));
    }
    Ok((&s[k - 1], &s[k]))
}

/// Closed-form solution with sup/inf taken over a dense radial sample.
#[derive(Debug, Clone, Copy)]
pub struct ExactField {
    pub solution: Exact,
    pub samples: usize,
}

impl ExactField {
    pub fn new(solution: Exact) -> Self {
        ExactField { solution, samples: 2000 }
    }
}

impl SpaceTime for ExactField {
    fn params(&self) -> &Params {
        self.solution.params()
    }

    fn value(&self, t: f64, r: f64) -> Result<f64> {
        self.solution.value(t, r)
    }

    fn sup_inf(&self, t: f64, radius: f64) -> Result<(f64, f64)> {
        let first = if matches!(self.solution, Exact::Separable(_)) { 1 } else { 0 };
        let mut acc = (f64::NEG_INFINITY, f64::INFINITY);
        if first == 1 {
            acc.0 = f64::INFINITY;
        }
        for k in first..=self.samples {
            let v = self.solution.value(t, radius * k as f64 / self.samples as f64)?;
            acc = (acc.0.max(v), acc.1.min(v));
        }
        Ok(acc)
    }
}

/// The closed-form solution sampled at cell centers at the given times.
pub fn exact_trajectory(solution: &Exact, grid: &WeightedGrid, times: &[f64]) -> Result<Trajectory> {
    let mut ts = times.to_vec();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let snapshots = ts.iter().map(|&t| sample(solution, grid, t)).collect::<Result<Vec<_>>>()?;
    let sup_history = snapshots.iter().map(|s| (s.t, s.sup())).collect();
    Ok(Trajectory {
        params: *solution.params(),
        grid: grid.clone(),
        snapshots,
        extinction: None,
        sup_history,
        steps: Vec::new(),
    })
}

/// Stored snapshots with `a ≤ t ≤ b` and their trapezoid weights.
pub fn time_window(traj: &Trajectory, a: f64, b: f64) -> Result<(Vec<&Snapshot>, Vec<f64>)> {
    let eps = 1e-12 * b.abs().max(1e-300);
    let snaps: Vec<&Snapshot> = traj.snapshots.iter().filter(|s| s.t >= a - eps && s.t <= b + eps).collect();
    if snaps.len() < 2 {
        return Err(Error::Domain(format!("need at least two stored snapshots in [{a}, {b}]")));
    }
    let mut w = vec![0.0; snaps.len()];
    for i in 0..snaps.len() - 1 {
        let h = snaps[i + 1].t - snaps[i].t;
        w[i] += h / 2.0;
        w[i + 1] += h / 2.0;
    }
    Ok((snaps, w))
}
