//! Implicit finite-volume solver for radial solutions.
//!
//! Each backward Euler step solves
//!
//! ```text
//! w_i (u_i − u_i^old)/dt = τ_{i+1/2}(v_{i+1} − v_i) − τ_{i−1/2}(v_i − v_{i−1}),   v = u^m
//! ```
//!
//! by Newton's method in the unknown `v`. With `u = max(v,0)^{1/m}` the system is a
//! convex M-function, so the iteration converges from any start and the Jacobian stays
//! finite where `u` vanishes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::grid::{Snapshot, WeightedGrid};
use crate::params::Params;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Boundary {
    /// Homogeneous Dirichlet data at the outer radius; the datum is cut to `|x| < support`.
    Mdp { support: f64 },
    /// Dirichlet value `δ` at the outer radius; datum cut to `|x| < support`, then lifted by `δ`.
    DeltaMdp { support: f64, delta: f64 },
    /// Dirichlet trace of a closed-form solution on both ends of an annulus
    /// (only the outer end when the grid starts at the origin).
    ExactTrace(Exact),
    ZeroFlux,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DtPolicy {
    Fixed(f64),
    Adaptive { dt0: f64, dt_max: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeControl {
    pub t_end: f64,
    pub dt: DtPolicy,
    /// Times at which snapshots are stored; steps are shortened to land on them.
    pub output_times: Vec<f64>,
    /// Additionally store every k-th step (0 disables).
    pub record_every: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonControl {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonControl {
    fn default() -> Self {
        NewtonControl { tol: 1e-14, max_iter: 80 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtinctionControl {
    /// Absolute threshold; `None` means `1e−8 · sup u₀`.
    pub tol: Option<f64>,
    pub stop: bool,
    pub refine: bool,
}

impl Default for ExtinctionControl {
    fn default() -> Self {
        ExtinctionControl { tol: None, stop: true, refine: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub params: Params,
    pub grid: WeightedGrid,
    pub bc: Boundary,
    pub initial: Snapshot,
    pub time: TimeControl,
    pub newton: NewtonControl,
    pub extinction: ExtinctionControl,
}

impl ProblemSpec {
    pub fn new(params: Params, grid: WeightedGrid, bc: Boundary, initial: Snapshot, time: TimeControl) -> Result<Self> {
        params.require_nonlinear()?;
        if initial.values.len() != grid.len() {
            return Err(Error::Domain(format!(
                "datum has {} values for {} cells",
                initial.values.len(),
                grid.len()
            )));
        }
        if initial.values.iter().any(|&u| !(u >= 0.0) || !u.is_finite()) {
            return Err(Error::Nonphysical("datum must be finite and nonnegative".into()));
        }
        match &bc {
            Boundary::Mdp { support } | Boundary::DeltaMdp { support, .. } => {
                if !(4.0 * support <= grid.r_max() * (1.0 + 1e-12)) {
                    return Err(Error::Domain(format!(
                        "support radius {support} must satisfy 4R ≤ R0 = {}",
                        grid.r_max()
                    )));
                }
                if grid.r_min() != 0.0 {
                    return Err(Error::Domain("Dirichlet ball problems need a grid starting at 0".into()));
                }
            }
            _ => {}
        }
        if let Boundary::DeltaMdp { delta, .. } = bc {
            if !(delta > 0.0) {
                return Err(Error::Domain(format!("δ must be positive, got {delta}")));
            }
        }
        if !(time.t_end > 0.0) {
            return Err(Error::Domain("t_end must be positive".into()));
        }
        Ok(ProblemSpec {
            params,
            grid,
            bc,
            initial,
            time,
            newton: NewtonControl::default(),
            extinction: ExtinctionControl::default(),
        })
    }

    /// The datum actually evolved: cut to the support ball and lifted where required.
    pub fn prepared_initial(&self) -> Snapshot {
        let mut values = self.initial.values.clone();
        match self.bc {
            Boundary::Mdp { support } | Boundary::DeltaMdp { support, .. } => {
                for (u, &r) in values.iter_mut().zip(&self.grid.centers) {
                    if r >= support {
                        *u = 0.0;
                    }
                }
            }
            _ => {}
        }
        if let Boundary::DeltaMdp { delta, .. } = self.bc {
            for u in values.iter_mut() {
                *u += delta;
            }
        }
        Snapshot { t: self.initial.t, values }
    }

    pub fn is_dirichlet(&self) -> bool {
        !matches!(self.bc, Boundary::ZeroFlux)
    }

    /// Dirichlet values of `u` at (inner, outer) ends at time `t`.
    fn boundary_values(&self, t: f64) -> Result<(Option<f64>, Option<f64>)> {
        let inner_open = self.grid.r_min() > 0.0;
        Ok(match &self.bc {
            Boundary::Mdp { .. } => (None, Some(0.0)),
            Boundary::DeltaMdp { delta, .. } => (None, Some(*delta)),
            Boundary::ZeroFlux => (None, None),
            Boundary::ExactTrace(sol) => {
                let inner = if inner_open { Some(sol.value(t, self.grid.r_min())?) } else { None };
                (inner, Some(sol.value(t, self.grid.r_max())?))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub t: f64,
    pub dt: f64,
    pub newton_iters: usize,
    pub update_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: Params,
    pub grid: WeightedGrid,
    pub snapshots: Vec<Snapshot>,
    pub extinction: Option<f64>,
    /// `(t, sup u)` after every step.
    pub sup_history: Vec<(f64, f64)>,
    pub steps: Vec<StepInfo>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    /// Stored snapshot at time `t` (to 1e−12 relative).
    pub fn at(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| (s.t - t).abs() <= 1e-12 * t.abs().max(1e-300))
    }

    /// Stored snapshot closest to `t`.
    pub fn nearest(&self, t: f64) -> &Snapshot {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .expect("trajectory holds at least the initial snapshot")
    }

    pub fn initial(&self) -> &Snapshot {
        &self.snapshots[0]
    }
}

fn phi(v: f64, inv_m: f64) -> f64 {
    if v > 0.0 {
        v.powf(inv_m)
    } else {
        0.0
    }
}

fn dphi(v: f64, inv_m: f64) -> f64 {
    if v > 0.0 {
        inv_m * v.powf(inv_m - 1.0)
    } else {
        0.0
    }
}

/// Thomas algorithm; `a` sub-diagonal (a[0] unused), `b` diagonal, `c` super-diagonal.
fn solve_tridiagonal(a: &[f64], b: &[f64], c: &[f64], d: &mut [f64]) {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut beta = b[0];
    d[0] /= beta;
    for i in 1..n {
        cp[i - 1] = c[i - 1] / beta;
        beta = b[i] - a[i] * cp[i - 1];
        d[i] = (d[i] - a[i] * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= cp[i] * d[i + 1];
    }
}

/// Residual of the implicit step at `v`.
fn residual(grid: &WeightedGrid, inv_m: f64, u_old: &[f64], v: &[f64], dt: f64, vin: Option<f64>, vout: Option<f64>) -> Vec<f64> {
    let n = v.len();
    let mut f = vec![0.0; n];
    for i in 0..n {
        let mut acc = grid.w_gamma[i] * (phi(v[i], inv_m) - u_old[i]) / dt;
        if i > 0 {
            acc += grid.trans[i - 1] * (v[i] - v[i - 1]);
        } else if let Some(b) = vin {
            acc += grid.trans_inner * (v[0] - b);
        }
        if i + 1 < n {
            acc += grid.trans[i] * (v[i] - v[i + 1]);
        } else if let Some(b) = vout {
            acc += grid.trans_outer * (v[i] - b);
        }
        f[i] = acc;
    }
    f
}

/// Solves one implicit step from `u_old` over `dt`, with boundary data at the new time.
pub fn implicit_solve(
    grid: &WeightedGrid,
    m: f64,
    u_old: &[f64],
    dt: f64,
    bnd: (Option<f64>, Option<f64>),
    newton: &NewtonControl,
) -> Result<(Vec<f64>, usize, f64)> {
    let n = u_old.len();
    let inv_m = 1.0 / m;
    let vin = bnd.0.map(|u| u.max(0.0).powf(m));
    let vout = bnd.1.map(|u| u.max(0.0).powf(m));
    let boundary_zero = vin.unwrap_or(0.0) == 0.0 && vout.unwrap_or(0.0) == 0.0;
    if boundary_zero && u_old.iter().all(|&u| u == 0.0) {
        return Ok((vec![0.0; n], 0, 0.0));
    }
    let mut v: Vec<f64> = u_old.iter().map(|&u| u.powf(m)).collect();
    let (mut a, mut b, mut c) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut last = f64::INFINITY;
    for iter in 1..=newton.max_iter {
        let f = residual(grid, inv_m, u_old, &v, dt, vin, vout);
        for i in 0..n {
            let mut diag = grid.w_gamma[i] * dphi(v[i], inv_m) / dt;
            if i > 0 {
                diag += grid.trans[i - 1];
                a[i] = -grid.trans[i - 1];
            } else if vin.is_some() {
                diag += grid.trans_inner;
            }
            if i + 1 < n {
                diag += grid.trans[i];
                c[i] = -grid.trans[i];
            } else if vout.is_some() {
                diag += grid.trans_outer;
            }
            b[i] = diag;
        }
        let mut delta: Vec<f64> = f.iter().map(|x| -x).collect();
        solve_tridiagonal(&a, &b, &c, &mut delta);
        let scale = v.iter().chain(vin.iter()).chain(vout.iter()).fold(0.0f64, |s, &x| s.max(x.abs()));
        let step = delta.iter().fold(0.0f64, |s, &x| s.max(x.abs()));
        if !step.is_finite() {
            return Err(Error::NewtonDivergence { t: f64::NAN, dt });
        }
        for (vi, d) in v.iter_mut().zip(&delta) {
            *vi += d;
        }
        last = step / scale.max(1e-300);
        if step <= newton.tol * scale || step == 0.0 {
            let u = v.iter().map(|&x| phi(x, inv_m)).collect();
            return Ok((u, iter, last));
        }
    }
    if last <= 1e-10 {
        let u = v.iter().map(|&x| phi(x, inv_m)).collect();
        return Ok((u, newton.max_iter, last));
    }
    Err(Error::NewtonDivergence { t: f64::NAN, dt })
}

/// One backward Euler step of length `dt` from `snapshot`.
pub fn step_implicit(spec: &ProblemSpec, snapshot: &Snapshot, dt: f64) -> Result<(Snapshot, StepInfo)> {
    let t_new = snapshot.t + dt;
    let bnd = spec.boundary_values(t_new)?;
    let (values, iters, upd) = implicit_solve(&spec.grid, spec.params.m, &snapshot.values, dt, bnd, &spec.newton)
        .map_err(|e| match e {
            Error::NewtonDivergence { dt, .. } => Error::NewtonDivergence { t: snapshot.t, dt },
            other => other,
        })?;
    if values.iter().any(|u| !u.is_finite()) {
        return Err(Error::Nonphysical(format!("non-finite value at t = {t_new}")));
    }
    Ok((Snapshot { t: t_new, values }, StepInfo { t: t_new, dt, newton_iters: iters, update_norm: upd }))
}

fn extinction_threshold(spec: &ProblemSpec, initial: &Snapshot) -> f64 {
    spec.extinction.tol.unwrap_or(1e-8 * initial.sup())
}

/// Marches from `start` with `sub` equal steps per bracket and narrows the bracket
/// around the first time with `sup u ≤ tol`.
fn refine_extinction(spec: &ProblemSpec, start: &Snapshot, t_hi: f64, tol: f64) -> Result<f64> {
    let mut lo = start.clone();
    let mut width = t_hi - start.t;
    for _level in 0..5 {
        let dt = width / 8.0;
        let mut cur = lo.clone();
        let mut found = None;
        for _ in 0..64 {
            let (next, _) = step_implicit(spec, &cur, dt)?;
            if next.sup() <= tol {
                found = Some(next.t);
                break;
            }
            cur = next;
        }
        match found {
            Some(t) => {
                lo = cur;
                width = t - lo.t;
            }
            None => return Ok(cur.t),
        }
    }
    Ok(lo.t + width)
}

/// Integrates the problem to `t_end` (or to extinction when requested).
pub fn run(spec: &ProblemSpec) -> Result<Trajectory> {
    let init = spec.prepared_initial();
    let t0 = init.t;
    let t_end = spec.time.t_end;
    let mut outputs: Vec<f64> = spec.time.output_times.iter().copied().filter(|&t| t > t0 && t <= t_end).collect();
    outputs.push(t_end);
    outputs.sort_by(f64::total_cmp);
    outputs.dedup();
    let tol = extinction_threshold(spec, &init);
    let mut traj = Trajectory {
        params: spec.params,
        grid: spec.grid.clone(),
        snapshots: vec![init.clone()],
        extinction: None,
        sup_history: vec![(t0, init.sup())],
        steps: Vec::new(),
    };
    if spec.is_dirichlet() && init.sup() <= tol {
        traj.extinction = Some(t0);
        if spec.extinction.stop {
            return Ok(traj);
        }
    }
    let (mut dt, dt_max, adaptive) = match spec.time.dt {
        DtPolicy::Fixed(dt) => (dt, dt, false),
        DtPolicy::Adaptive { dt0, dt_max } => (dt0, dt_max, true),
    };
    if !(dt > 0.0) {
        return Err(Error::Domain("time step must be positive".into()));
    }
    let base_dt = dt;
    let floor = 1e-12 * t_end;
    let mut cur = init;
    let mut next_out = 0;
    let mut count = 0usize;
    while next_out < outputs.len() {
        let target = outputs[next_out];
        let remaining = target - cur.t;
        let landing = dt >= remaining * (1.0 - 1e-10);
        let h = if landing { remaining } else { dt };
        let (mut next, info) = match step_implicit(spec, &cur, h) {
            Ok(x) => x,
            Err(Error::NewtonDivergence { .. }) => {
                dt /= 2.0;
                if dt < floor {
                    return Err(Error::NewtonDivergence { t: cur.t, dt });
                }
                continue;
            }
            Err(e) => return Err(e),
        };
        if landing {
            next.t = target;
            next_out += 1;
        }
        count += 1;
        let sup = next.sup();
        traj.sup_history.push((next.t, sup));
        traj.steps.push(info);
        let crossed = spec.is_dirichlet() && traj.extinction.is_none() && sup <= tol;
        if crossed {
            let t_ext = if spec.extinction.refine { refine_extinction(spec, &cur, next.t, tol)? } else { next.t };
            traj.extinction = Some(t_ext);
        }
        let store = landing || (spec.time.record_every > 0 && count % spec.time.record_every == 0);
        if store || (crossed && spec.extinction.stop) {
            traj.snapshots.push(next.clone());
        }
        if crossed && spec.extinction.stop {
            break;
        }
        cur = next;
        if adaptive {
            dt = (dt * 1.2).min(dt_max);
        } else if !landing {
            dt = (dt * 2.0).min(base_dt);
        }
    }
    Ok(traj)
}

/// First time with `sup u ≤ tol`, refined by re-running the bracketing interval at smaller steps.
pub fn detect_extinction(traj: &Trajectory, spec: &ProblemSpec, tol: f64) -> Result<f64> {
    if !spec.is_dirichlet() {
        let t_end = traj.sup_history.last().map(|x| x.0).unwrap_or(0.0);
        return Err(Error::NotExtinct { t_end });
    }
    let idx = traj.sup_history.iter().position(|&(_, s)| s <= tol);
    let Some(idx) = idx else {
        let t_end = traj.sup_history.last().map(|x| x.0).unwrap_or(0.0);
        return Err(Error::NotExtinct { t_end });
    };
    if idx == 0 {
        return Ok(traj.sup_history[0].0);
    }
    let (t_lo, t_hi) = (traj.sup_history[idx - 1].0, traj.sup_history[idx].0);
    let start = traj
        .snapshots
        .iter()
        .filter(|s| s.t <= t_lo * (1.0 + 1e-14))
        .last()
        .expect("initial snapshot precedes any bracket");
    let mut cur = start.clone();
    let width = t_hi - t_lo;
    while cur.t < t_lo - 1e-12 * width {
        let h = width.min(t_lo - cur.t);
        cur = step_implicit(spec, &cur, h)?.0;
        if cur.sup() <= tol {
            return refine_extinction(spec, start, cur.t, tol);
        }
    }
    refine_extinction(spec, &cur, t_hi, tol)
}

/// Neville extrapolation of `(x_k, y_k)` to `x = 0`.
pub fn extrapolate_to_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (xs[i + k] * p[i] - xs[i] * p[i + 1]) / (xs[i + k] - xs[i]);
        }
    }
    p[0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaContinuation {
    pub deltas: Vec<f64>,
    pub runs: Vec<Trajectory>,
    /// Snapshots at the common output times, extrapolated to `δ = 0`.
    pub extrapolated: Trajectory,
}

/// Solves the lifted problem for each `δ` and extrapolates the stored snapshots to `δ = 0`.
pub fn run_delta_continuation(spec: &ProblemSpec, deltas: &[f64]) -> Result<DeltaContinuation> {
    let support = match spec.bc {
        Boundary::Mdp { support } | Boundary::DeltaMdp { support, .. } => support,
        _ => return Err(Error::Domain("δ-continuation needs a Dirichlet ball problem".into())),
    };
    if deltas.is_empty() || deltas.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::Domain("δ list must be nonempty and positive".into()));
    }
    let runs: Vec<Trajectory> = deltas
        .par_iter()
        .map(|&delta| {
            let mut s = spec.clone();
            s.bc = Boundary::DeltaMdp { support, delta };
            s.time.record_every = 0;
            run(&s)
        })
        .collect::<Result<_>>()?;
    let times = runs[0].times();
    let mut snapshots = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let mut values = vec![0.0; spec.grid.len()];
        for (i, v) in values.iter_mut().enumerate() {
            let ys: Vec<f64> = runs.iter().map(|r| r.snapshots[k].values[i]).collect();
            *v = extrapolate_to_zero(deltas, &ys);
        }
        if runs.iter().any(|r| r.snapshots.len() != times.len() || (r.snapshots[k].t - t).abs() > 1e-12 * t.max(1.0)) {
            return Err(Error::Domain("δ runs do not share output times".into()));
        }
        snapshots.push(Snapshot { t, values });
    }
    let extrapolated = Trajectory {
        params: spec.params,
        grid: spec.grid.clone(),
        snapshots,
        extinction: None,
        sup_history: Vec::new(),
        steps: Vec::new(),
    };
    Ok(DeltaContinuation { deltas: deltas.to_vec(), runs, extrapolated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, Grading};

    fn setup(bc: Boundary, values: Vec<f64>) -> ProblemSpec {
        let p = Params::new(3, 1.0, 0.0, 0.5, 2.0).unwrap();
        let g = build_grid(&p, 0.0, 1.0, values.len(), Grading::Uniform).unwrap();
        let time = TimeControl { t_end: 0.1, dt: DtPolicy::Fixed(0.01), output_times: vec![], record_every: 1 };
        ProblemSpec::new(p, g, bc, Snapshot { t: 0.0, values }, time).unwrap()
    }

    #[test]
    fn constant_state_is_steady_under_zero_flux() {
        let spec = setup(Boundary::ZeroFlux, vec![0.7; 12]);
        let (next, _) = step_implicit(&spec, &spec.initial, 0.05).unwrap();
        for v in next.values {
            assert!((v - 0.7).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_state_stays_zero_under_dirichlet() {
        let spec = setup(Boundary::Mdp { support: 0.25 }, vec![0.0; 12]);
        let (next, _) = step_implicit(&spec, &spec.initial, 0.05).unwrap();
        assert!(next.values.iter().all(|&v| v == 0.0));
        let traj = run(&spec).unwrap();
        assert_eq!(traj.extinction, Some(0.0));
    }

    #[test]
    fn neville_recovers_polynomials() {
        let xs = [0.4, 0.2, 0.1];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 + 2.0 * x - x * x).collect();
        assert!((extrapolate_to_zero(&xs, &ys) - 3.0).abs() < 1e-13);
    }
}
