//! Harnack quotients, Hölder exponents, the `BMO` window of `log u` and the linear Harnack constant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::CellField;
use crate::geometry::{inclusion_factor, make_cylinder, Ball, CylinderKind};
use crate::grid::Snapshot;
use crate::inequalities::{bmo_gamma, reverse_holder};
use crate::params::Params;
use crate::report::{CheckReport, Context};
use crate::solver::Trajectory;

use super::smoothing::cells_in_ball;
use super::spacetime::{stored, SpaceTime};

/// `sup_{B_R} u(t) ≤ κ₃ inf_{B_R} u(t+θ)`.
pub fn harnack_quotient(field: &dyn SpaceTime, radius: f64, t: f64, theta: f64, kappa3: f64) -> Result<CheckReport> {
    let (sup, _) = field.sup_inf(t, radius)?;
    let (_, inf) = field.sup_inf(t + theta, radius)?;
    if !(inf > 0.0) {
        return Err(Error::ZeroInfimum { t: t + theta });
    }
    let name = if theta < 0.0 {
        "harnack_backward"
    } else if theta > 0.0 {
        "harnack_forward"
    } else {
        "harnack_elliptic"
    };
    let ctx = Context::new(field.params()).ball(Ball::centered(radius)).times(&[t, t + theta]).value("theta", theta);
    let mut r = CheckReport::scaled(name, sup, inf, kappa3, ctx);
    r.pass = r.pass && sup.is_finite();
    Ok(r)
}

/// Times `(t−θ, t, t+θ)` inside `[t₀+εt*, t₀+t*]` with `t` at the midpoint.
pub fn triptych_times(t0: f64, t_star: f64, eps: f64) -> [f64; 3] {
    let t = t0 + 0.5 * (1.0 + eps) * t_star;
    let theta = 0.45 * (1.0 - eps) * t_star;
    [t - theta, t, t + theta]
}

/// Backward, elliptic and forward quotients at the times of [`triptych_times`].
pub fn harnack_triptych(field: &dyn SpaceTime, radius: f64, t0: f64, t_star: f64, eps: f64, kappa3: f64) -> Result<Vec<CheckReport>> {
    let [a, t, b] = triptych_times(t0, t_star, eps);
    [a - t, 0.0, b - t].iter().map(|&th| harnack_quotient(field, radius, t, th, kappa3)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    /// Least-squares slope; `None` when the oscillation vanishes at every scale.
    pub exponent: Option<f64>,
    pub scales: Vec<f64>,
    pub oscillations: Vec<f64>,
}

/// Oscillation of `u` around `(t₀, x₀)`, `|x₀| = r0`, over points with
/// `|x−x₀| + M₀^{(m−1)/(2∨σ)} |t−t₀|^{1/(2∨σ)} ≤ d` for `d = d_max 2^{−j}`, and the
/// slope of `log osc` against `log d`. Points outside the time range of `field` are skipped.
pub fn holder_exponent(field: &dyn SpaceTime, t0: f64, r0: f64, m0: f64, d_max: f64, levels: usize) -> Result<HolderFit> {
    let p = field.params();
    let k = p.sigma().max(2.0);
    let time_scale = m0.powf((p.m - 1.0) / k);
    let u0 = field.value(t0, r0)?;
    let mut scales = Vec::new();
    let mut oscs = Vec::new();
    for j in 0..levels {
        let d = d_max / 2f64.powi(j as i32);
        let mut osc = 0.0f64;
        for a in -20..=20 {
            let s = d * a as f64 / 20.0;
            let dt_max = ((d - s.abs()) / time_scale).max(0.0).powf(k);
            for f in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                let t = t0 + f * dt_max;
                if let Ok(v) = field.value(t, (r0 + s).abs()) {
                    osc = osc.max((v - u0).abs());
                }
            }
        }
        scales.push(d);
        oscs.push(osc);
    }
    let pts: Vec<(f64, f64)> = scales.iter().zip(&oscs).filter(|(_, &o)| o > 0.0).map(|(&d, &o)| (d.ln(), o.ln())).collect();
    if oscs.iter().all(|&o| o == 0.0) {
        return Ok(HolderFit { exponent: None, scales, oscillations: oscs });
    }
    if pts.len() < 3 {
        return Err(Error::InsufficientSamples { found: pts.len(), needed: 3 });
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|x| x.0).sum::<f64>() / n, pts.iter().map(|x| x.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    Ok(HolderFit { exponent: Some(sxy / sxx), scales, oscillations: oscs })
}

/// `‖log u(t)‖_{BMO_γ(B_R)} ≤ C (1 + (R^σ/t)((|x₀|/R)∨1)^{β−γ} (sup_{B_{2R}} u(t))^{1−m})^{1/2}`
/// followed by reverse Hölder at half the admissible window `1/(κ₆‖log u‖_{BMO})`.
pub fn check_bmo_window(
    traj: &Trajectory,
    ball: &Ball,
    t: f64,
    c_bmo: f64,
    kappa6: f64,
    kappa7: f64,
) -> Result<Vec<CheckReport>> {
    let p = &traj.params;
    let g = &traj.grid;
    let snap = stored(traj, t)?;
    let cells = cells_in_ball(g, ball);
    if cells.iter().any(|&i| !(snap.values[i] > 0.0)) {
        return Err(Error::ZeroInfimum { t });
    }
    let logs = Snapshot { t, values: snap.values.iter().map(|&u| if u > 0.0 { u.ln() } else { 0.0 }).collect() };
    let bmo = bmo_gamma(p, &CellField::new(g, &logs), ball, 5)?.bmo_norm;
    let sup2 = cells_in_ball(g, &ball.scaled(2.0)).iter().map(|&i| snap.values[i]).fold(0.0, f64::max);
    let dt = t - traj.initial().t;
    let geo = (ball.center_norm / ball.radius).max(1.0).powf(p.beta - p.gamma);
    let base = (1.0 + ball.radius.powf(p.sigma()) / dt * geo * sup2.powf(1.0 - p.m)).sqrt();
    let ctx = Context::new(p).ball(*ball).times(&[t]).grid(g.id()).value("bmo", bmo);
    let structure = CheckReport::scaled("bmo_structure", bmo, base, c_bmo, ctx);
    let window = if bmo > 0.0 { 1.0 / (kappa6 * bmo) } else { 1.0 };
    let rh = reverse_holder(p, &CellField::new(g, snap), ball, 0.5 * window, bmo, kappa6, kappa7)?;
    Ok(vec![structure, rh])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearHarnack {
    /// `max(2, H^{1/2})`.
    pub kappa_l: f64,
    /// Largest `sup_{Q⁻} v / inf_{Q⁺} v` over the shifted kernels.
    pub quotient: f64,
    pub inclusion: f64,
    /// `log_A(H/(H−1))` with `H = κ_ℓ²`.
    pub alpha: f64,
}

/// `K(t, r) = t^{−(N−γ)/σ} exp(−r^σ/(σ² t))`, the source solution of `v_t = |x|^γ∇·(|x|^{−β}∇v)`.
pub fn linear_kernel(params: &Params, t: f64, r: f64) -> f64 {
    let s = params.sigma();
    t.powf(-(params.nf() - params.gamma) / s) * (-r.powf(s) / (s * s * t)).exp()
}

/// Harnack quotient of the linear equation (`λ₀ = λ₁ = 1`) on the cylinders
/// `Q⁻ = (t₀−7ρ/8, t₀−5ρ/8] × B_{R/2}`, `Q⁺ = (t₀−ρ/4, t₀] × B_{R/2}` for kernels started
/// at `t₀ − ρ − s`, maximized over the shifts `s ∈ ρ·[10⁻³, 10²]`.
pub fn linear_harnack(params: &Params, radius: f64) -> Result<LinearHarnack> {
    let ball = Ball::centered(radius);
    let minus = make_cylinder(CylinderKind::Backward, 0.0, ball);
    let plus = make_cylinder(CylinderKind::Forward, 0.0, ball);
    let full = make_cylinder(CylinderKind::Full, 0.0, ball);
    let (a_m, b_m) = minus.time_interval(params)?;
    let (a_p, b_p) = plus.time_interval(params)?;
    let (start, _) = full.time_interval(params)?;
    let rho = -start;
    let rs = minus.spatial_radius();
    let nt = 101;
    let nr = 101;
    let mut best = 1.0f64;
    for k in 0..=50 {
        let s = rho * 10f64.powf(-3.0 + 5.0 * k as f64 / 50.0);
        let shift = |t: f64| t - start + s;
        let mut sup = 0.0f64;
        let mut inf = f64::INFINITY;
        for i in 0..nt {
            let f = i as f64 / (nt - 1) as f64;
            let tm = shift(a_m + f * (b_m - a_m));
            let tp = shift(a_p + f * (b_p - a_p));
            for j in 0..nr {
                let r = rs * j as f64 / (nr - 1) as f64;
                sup = sup.max(linear_kernel(params, tm, r));
                inf = inf.min(linear_kernel(params, tp, r));
            }
        }
        best = best.max(sup / inf);
    }
    let kappa_l = best.sqrt().max(2.0);
    let h = kappa_l * kappa_l;
    let inclusion = inclusion_factor(params, &ball)?;
    let alpha = (h / (h - 1.0)).ln() / inclusion.ln();
    Ok(LinearHarnack { kappa_l, quotient: best, inclusion, alpha })
}
