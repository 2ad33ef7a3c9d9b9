//! Mass displacement, `L^p` stability, lower bounds and extinction-time brackets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{CellField, RadialField};
use crate::geometry::{h_sigma, mu, Ball};
use crate::inequalities::kappa13_measure_exponent;
use crate::params::Params;
use crate::report::{CheckReport, Context, CHECK_TOL};
use crate::solver::Trajectory;

use super::hp::minimal_life_time;
use super::spacetime::{stored, SpaceTime};

fn ball_integral(traj: &Trajectory, t: f64, ball: &Ball, g: &(dyn Fn(f64) -> f64 + Sync)) -> Result<f64> {
    let snap = stored(traj, t)?;
    if ball.radial_range().1 > traj.grid.r_max() * (1.0 + 1e-12) {
        return Err(Error::Domain("ball leaves the computational domain".into()));
    }
    CellField::new(&traj.grid, snap).ball_integral(traj.params.n, traj.params.gamma, ball, g)
}

/// `‖u(t)‖_{L¹_γ(B_R)}^{1−m} ≤ ‖u(τ)‖_{L¹_γ(B_{2R})}^{1−m} + κ′₁₀ μ_γ(B_R)^{1−m} |t−τ| / R^σ`.
pub fn check_herrero_pierre(traj: &Trajectory, ball: &Ball, t: f64, tau: f64, kappa10_prime: f64) -> Result<CheckReport> {
    let p = &traj.params;
    let e = 1.0 - p.m;
    let lhs = ball_integral(traj, t, ball, &|u| u)?.max(0.0).powf(e);
    let fixed = ball_integral(traj, tau, &ball.scaled(2.0), &|u| u)?.max(0.0).powf(e);
    let base = mu(p.n, p.gamma, ball)?.powf(e) * (t - tau).abs() / ball.radius.powf(p.sigma());
    let ctx = Context::new(p).ball(*ball).times(&[t, tau]).grid(traj.grid.id());
    Ok(CheckReport::affine("herrero_pierre", lhs, fixed, base, kappa10_prime, ctx))
}

/// `‖u(t)‖_{L^p_γ(B_{R₁})}^{1−m} ≤ ‖u(τ)‖_{L^p_γ(B_{R₀})}^{1−m} + K (t−τ)` with
/// `K = c_p h_σ(R₀,R₁,x₀)/(R₀−R₁)^σ μ_γ(B_{R₀}∖B_{R₁})^{(1−m)/p}`.
pub fn check_lp_stability(
    traj: &Trajectory,
    center_norm: f64,
    r1: f64,
    r0: f64,
    p_exp: f64,
    t: f64,
    tau: f64,
    c_p: f64,
) -> Result<CheckReport> {
    let p = &traj.params;
    if !(p_exp > 1.0) {
        return Err(Error::Domain(format!("L^p stability needs p > 1, got {p_exp}")));
    }
    if !(t >= tau) {
        return Err(Error::Domain("L^p stability runs forward in time: need t ≥ τ".into()));
    }
    if !(0.0 < r1 && r1 < r0) {
        return Err(Error::Geometry(format!("need 0 < R₁ < R₀, got {r1}, {r0}")));
    }
    if center_norm >= r1 && center_norm <= r0 {
        return Err(Error::Geometry("the origin lies in the closed annulus B_{R₀} ∖ B_{R₁}".into()));
    }
    let inner = Ball::new(center_norm, r1)?;
    let outer = Ball::new(center_norm, r0)?;
    let e = (1.0 - p.m) / p_exp;
    let lhs = ball_integral(traj, t, &inner, &|u| u.max(0.0).powf(p_exp))?.powf(e);
    let fixed = ball_integral(traj, tau, &outer, &|u| u.max(0.0).powf(p_exp))?.powf(e);
    let annulus = mu(p.n, p.gamma, &outer)? - mu(p.n, p.gamma, &inner)?;
    let h = h_sigma(p.sigma(), r0, r1, center_norm)?;
    let k_unit = h / (r0 - r1).powf(p.sigma()) * annulus.powf(e);
    let ctx = Context::new(p)
        .ball(outer)
        .times(&[t, tau])
        .grid(traj.grid.id())
        .value("r1", r1)
        .value("p", p_exp)
        .value("h_sigma", h);
    Ok(CheckReport::affine("lp_stability", lhs, fixed, k_unit * (t - tau), c_p, ctx))
}

/// Lower bound `inf_{B_{2R}} u(t) ≥ κ ((μ_β/μ_γ)(B_R) t/R²)^{1/(1−m)}` at each of `times`.
/// The report carries `lhs = κ·base` and `rhs = inf` at the time where `inf/base` is smallest,
/// and the measured constant is that smallest ratio.
pub fn check_lower_bound(field: &dyn SpaceTime, radius: f64, t0: f64, times: &[f64], kappa: f64) -> Result<CheckReport> {
    let p = *field.params();
    let ball = Ball::centered(radius);
    let ratio = mu(p.n, p.beta, &ball)? / mu(p.n, p.gamma, &ball)?;
    let mut worst: Option<(f64, f64, f64)> = None;
    for &t in times {
        let dt = t - t0;
        if !(dt > 0.0) {
            continue;
        }
        let (_, inf) = field.sup_inf(t, 2.0 * radius)?;
        if !(inf > 0.0) {
            return Err(Error::ZeroInfimum { t });
        }
        let base = (ratio * dt / (radius * radius)).powf(1.0 / (1.0 - p.m));
        if worst.map_or(true, |(_, b, i)| inf / base < i / b) {
            worst = Some((t, base, inf));
        }
    }
    let (t, base, inf) = match worst {
        Some(w) => w,
        None => (t0, 0.0, 0.0),
    };
    let measured = if base > 0.0 { inf / base } else { f64::INFINITY };
    let ctx = Context::new(&p).ball(ball).times(times).value("t_worst", t).value("base", base);
    Ok(CheckReport {
        name: "lower_bound".into(),
        lhs: kappa * base,
        rhs: inf,
        constant: kappa,
        measured_constant: measured,
        pass: kappa * base <= inf * (1.0 + CHECK_TOL),
        tolerance: CHECK_TOL,
        context: ctx,
    })
}

/// `κ_{q,0} = 4 m (q−1)(1−m) / (κ₁₃² (q+m−1)²)`.
pub fn kappa_q0(params: &Params, q: f64, kappa13: f64) -> f64 {
    let m = params.m;
    4.0 * m * (q - 1.0) * (1.0 - m) / (kappa13 * kappa13 * (q + m - 1.0).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtinctionBracket {
    pub t_star: f64,
    pub t_ext: f64,
    pub upper: f64,
}

/// `t* ≤ T ≤ μ_γ(B_{R₀})^{σ(1−p_c/q)/(N−γ)} ‖u₀‖_{L^q_γ(B_{R₀})}^{1−m} / κ_{q,0}` for a
/// Dirichlet run on `B_{R₀}(0)` whose datum is supported in `B_R(0)`.
pub fn extinction_bracket(traj: &Trajectory, radius: f64, q: f64, kappa13: f64, kappa_star: f64) -> Result<ExtinctionBracket> {
    let p = &traj.params;
    let t_ext = traj.extinction.ok_or_else(|| Error::NotExtinct {
        t_end: traj.sup_history.last().map(|x| x.0).unwrap_or(0.0),
    })?;
    let grid = &traj.grid;
    let u0 = traj.initial();
    let field = CellField::new(grid, u0);
    let t_star = minimal_life_time(p, &field, &Ball::centered(radius), kappa_star)?;
    let r0 = grid.r_max();
    let big = Ball::centered(r0);
    let lq = field.ball_integral(p.n, p.gamma, &big, &|u| u.max(0.0).powf(q))?.powf(1.0 / q);
    let expo = 2.0 * kappa13_measure_exponent(p, q);
    let upper = mu(p.n, p.gamma, &big)?.powf(expo) * lq.powf(1.0 - p.m) / kappa_q0(p, q, kappa13);
    Ok(ExtinctionBracket { t_star, t_ext, upper })
}

/// Two reports: `t* ≤ T` and `T ≤ upper`.
pub fn check_extinction_bounds(traj: &Trajectory, radius: f64, q: f64, kappa13: f64, kappa_star: f64) -> Result<Vec<CheckReport>> {
    let b = extinction_bracket(traj, radius, q, kappa13, kappa_star)?;
    let ctx = Context::new(&traj.params)
        .ball(Ball::centered(radius))
        .grid(traj.grid.id())
        .value("q", q)
        .value("kappa13", kappa13)
        .value("kappa_star", kappa_star)
        .value("t_ext", b.t_ext);
    let lower = CheckReport::scaled("extinction_lower", b.t_star, b.t_ext, 1.0, ctx.clone());
    let upper = CheckReport::scaled("extinction_upper", b.t_ext, b.upper, 1.0, ctx);
    Ok(vec![lower, upper])
}

/// Relative error of a detected extinction time against a known one.
pub fn check_extinction_time(traj: &Trajectory, exact: f64, rel_tol: f64) -> Result<CheckReport> {
    let t = traj.extinction.ok_or_else(|| Error::NotExtinct {
        t_end: traj.sup_history.last().map(|x| x.0).unwrap_or(0.0),
    })?;
    let err = (t - exact).abs() / exact;
    let ctx = Context::new(&traj.params).grid(traj.grid.id()).value("t_ext", t).value("t_exact", exact);
    let mut r = CheckReport::scaled("extinction_time", err, 1.0, rel_tol, ctx);
    r.pass = err <= rel_tol;
    Ok(r)
}
