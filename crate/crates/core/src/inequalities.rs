//! Weighted functional inequalities evaluated by radial quadrature: CKN on `ℝ^N`
//! and on balls, Poincaré, the space-time iterative CKN, `BMO_γ` norms with the
//! John–Nirenberg window and reverse Hölder, the Herrero–Pierre cut-off constant and
//! the Sobolev–Poincaré constant of the extinction estimate.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{ball_lp_norm, RadialField};
use crate::geometry::{mu, radial_ball_integral, rho, sphere_area, Ball};
use crate::grid::{build_grid, Grading};
use crate::params::Params;
use crate::quadrature::{integrate, integrate_graded, integrate_to_infinity, Tolerance};
use crate::report::{CheckReport, Context};

pub const PROBE_FAMILY_VERSION: &str = "probes-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Profile {
    /// `(1 + (r/λ)²)^{−k}`.
    AubinTalenti { scale: f64, exponent: f64 },
    /// `(1 − (r/R)²)^k` on `r < R`.
    Bump { radius: f64, power: f64 },
    /// `exp(−(r/s)²)`.
    Gaussian { scale: f64 },
    Constant { value: f64 },
    Linear { slope: f64 },
    Log,
    /// `P(r/R)(1 − (r/R)²)²` on `r < R`, `P(x) = Σ c_k x^k`.
    PolyBump { radius: f64, coeffs: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub profile: Profile,
}

impl TestFunction {
    pub fn new(profile: Profile) -> Self {
        TestFunction { profile }
    }

    /// Value and radial derivative.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        match &self.profile {
            Profile::AubinTalenti { scale, exponent } => {
                let x = r / scale;
                let base = 1.0 + x * x;
                let v = base.powf(-exponent);
                (v, -2.0 * exponent * v / base * x / scale)
            }
            Profile::Bump { radius, power } => {
                if r >= *radius {
                    return (0.0, 0.0);
                }
                let x = r / radius;
                let base = 1.0 - x * x;
                (base.powf(*power), -2.0 * power * base.powf(power - 1.0) * x / radius)
            }
            Profile::Gaussian { scale } => {
                let v = (-(r / scale).powi(2)).exp();
                (v, -2.0 * r / (scale * scale) * v)
            }
            Profile::Constant { value } => (*value, 0.0),
            Profile::Linear { slope } => (slope * r, *slope),
            Profile::Log => (r.ln(), 1.0 / r),
            Profile::PolyBump { radius, coeffs } => {
                if r >= *radius {
                    return (0.0, 0.0);
                }
                let x = r / radius;
                let (mut p, mut dp) = (0.0, 0.0);
                for (k, c) in coeffs.iter().enumerate().rev() {
                    dp = dp * x + p;
                    p = p * x + c;
                    let _ = k;
                }
                let w = 1.0 - x * x;
                (p * w * w, (dp * w * w - 4.0 * x * p * w) / radius)
            }
        }
    }

    pub fn support(&self) -> f64 {
        match &self.profile {
            Profile::Bump { radius, .. } | Profile::PolyBump { radius, .. } => *radius,
            _ => f64::INFINITY,
        }
    }

    fn breaks(&self) -> Vec<f64> {
        let s = self.support();
        if s.is_finite() {
            vec![s]
        } else {
            Vec::new()
        }
    }

    /// Length scale used to split whole-space integrals.
    fn scale(&self) -> f64 {
        match &self.profile {
            Profile::AubinTalenti { scale, .. } | Profile::Gaussian { scale } => *scale,
            Profile::Bump { radius, .. } | Profile::PolyBump { radius, .. } => *radius,
            _ => 1.0,
        }
    }

    /// Canonical one-line description used in probe manifests.
    pub fn manifest_line(&self) -> String {
        serde_json::to_string(&self.profile).unwrap_or_default()
    }
}

impl RadialField for TestFunction {
    fn value(&self, r: f64) -> f64 {
        self.eval(r).0
    }

    fn breaks(&self) -> Vec<f64> {
        TestFunction::breaks(self)
    }
}

fn tol() -> Tolerance {
    Tolerance { rel: 1e-12, abs: 1e-300, max_pieces: 4000 }
}

/// `∫_{ℝ^N} g(f, f') |x|^{−α} dx` for a radial test function.
fn whole_space<G: Fn(f64, f64) -> f64>(n: u32, alpha: f64, f: &TestFunction, g: G) -> Result<f64> {
    let e = n as f64 - 1.0 - alpha;
    let h = |r: f64| {
        let (v, d) = f.eval(r);
        g(v, d) * r.powf(e)
    };
    let s = f.support();
    let omega = sphere_area(n);
    if s.is_finite() {
        return Ok(omega * integrate_graded(h, 0.0, s, tol())?);
    }
    let a = f.scale();
    Ok(omega * (integrate_graded(h, 0.0, a, tol())? + integrate_to_infinity(h, a, tol())?))
}

fn on_ball<G: Fn(f64, f64) -> f64>(n: u32, alpha: f64, f: &TestFunction, ball: &Ball, g: G) -> Result<f64> {
    radial_ball_integral(
        n,
        alpha,
        ball,
        |r| {
            let (v, d) = f.eval(r);
            g(v, d)
        },
        &f.breaks(),
    )
}

/// `‖f‖_{L^{r*}_γ(ℝ^N)} / ‖∇f‖_{L²_β(ℝ^N)}`.
pub fn ckn_ratio(params: &Params, f: &TestFunction) -> Result<f64> {
    let rs = params.r_star();
    let num = whole_space(params.n, params.gamma, f, |v, _| v.abs().powf(rs))?.powf(1.0 / rs);
    let den = whole_space(params.n, params.beta, f, |_, d| d * d)?.sqrt();
    if !(den > 0.0) || !num.is_finite() {
        return Err(Error::Domain("test function has zero or infinite norms".into()));
    }
    Ok(num / den)
}

/// `‖f‖_{r*,γ,B} ≤ S (‖∇f‖_{2,β,B} + μ_γ(B)^{−σ/(2(N−γ))} ‖f‖_{2,γ,B})`.
pub fn ckn_on_ball(params: &Params, f: &TestFunction, ball: &Ball, s_const: f64) -> Result<CheckReport> {
    let n = params.n;
    let rs = params.r_star();
    let lhs = on_ball(n, params.gamma, f, ball, |v, _| v.abs().powf(rs))?.powf(1.0 / rs);
    let grad = on_ball(n, params.beta, f, ball, |_, d| d * d)?.sqrt();
    let l2 = on_ball(n, params.gamma, f, ball, |v, _| v * v)?.sqrt();
    let mg = mu(n, params.gamma, ball)?;
    let base = grad + mg.powf(-params.sigma() / (2.0 * (params.nf() - params.gamma))) * l2;
    let ctx = Context::new(params).ball(*ball).value("grad", grad).value("l2", l2);
    Ok(CheckReport::scaled("ckn_ball", lhs, base, s_const, ctx))
}

/// `(μ_γ⁻¹∫_B |f − f̄|²)^{1/2} ≤ P R (μ_β⁻¹∫_B |∇f|²)^{1/2}`.
pub fn poincare_on_ball(params: &Params, f: &TestFunction, ball: &Ball, p_const: f64) -> Result<CheckReport> {
    let n = params.n;
    let mg = mu(n, params.gamma, ball)?;
    let mb = mu(n, params.beta, ball)?;
    let mean = on_ball(n, params.gamma, f, ball, |v, _| v)? / mg;
    let mut lhs = (on_ball(n, params.gamma, f, ball, |v, _| (v - mean).powi(2))? / mg).sqrt();
    if lhs <= 1e-12 * mean.abs() {
        lhs = 0.0;
    }
    let grad = (on_ball(n, params.beta, f, ball, |_, d| d * d)? / mb).sqrt();
    let base = ball.radius * grad;
    let ctx = Context::new(params).ball(*ball).value("mean", mean);
    Ok(CheckReport::scaled("poincare_ball", lhs, base, p_const, ctx))
}

/// Trapezoid weights for the nodes `times`.
fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let k = times.len();
    let mut w = vec![0.0; k];
    for i in 0..k.saturating_sub(1) {
        let h = times[i + 1] - times[i];
        w[i] += h / 2.0;
        w[i + 1] += h / 2.0;
    }
    w
}

/// Space-time CKN inequality
///
/// ```text
/// ∫∫ f^{2a} ≤ 2S² [∫∫ f² + μ_γ(B)^{σ/(N−γ)} ∫∫ |∇f|² |x|^{−β}] · sup_t (μ_γ(B)⁻¹∫ f^{2(a−1)q})^{1/q}
/// ```
///
/// with `q = (N−γ)/σ`, time integrals by the trapezoid rule on `times`.
/// `f(t, r)` returns value and radial derivative.
pub fn iterative_ckn<F>(params: &Params, f: F, ball: &Ball, times: &[f64], a: f64, s_const: f64) -> Result<CheckReport>
where
    F: Fn(f64, f64) -> (f64, f64),
{
    let rs = params.r_star();
    if !(a >= 1.0 && a <= rs / 2.0 + 1e-12) {
        return Err(Error::Domain(format!("a must lie in [1, r*/2] = [1, {}], got {a}", rs / 2.0)));
    }
    if times.len() < 2 || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("need at least two increasing times".into()));
    }
    let n = params.n;
    let q = params.q();
    let mg = mu(n, params.gamma, ball)?;
    let w = trapezoid_weights(times);
    let (mut lhs, mut l2, mut grad, mut sup) = (0.0, 0.0, 0.0, 0.0f64);
    let e = 2.0 * (a - 1.0) * q;
    for (&t, &wt) in times.iter().zip(&w) {
        let val = |r: f64| f(t, r).0;
        let der = |r: f64| f(t, r).1;
        lhs += wt * radial_ball_integral(n, params.gamma, ball, |r| val(r).abs().powf(2.0 * a), &[])?;
        l2 += wt * radial_ball_integral(n, params.gamma, ball, |r| val(r).powi(2), &[])?;
        grad += wt * radial_ball_integral(n, params.beta, ball, |r| der(r).powi(2), &[])?;
        let avg = if e == 0.0 {
            1.0
        } else {
            radial_ball_integral(n, params.gamma, ball, |r| val(r).abs().powf(e), &[])? / mg
        };
        sup = sup.max(avg.powf(1.0 / q));
    }
    let bracket = l2 + mg.powf(params.sigma() / (params.nf() - params.gamma)) * grad;
    let ctx = Context::new(params).ball(*ball).times(times).value("a", a).value("sup_factor", sup);
    let mut rep = CheckReport::scaled("iterative_ckn", lhs, bracket * sup, 2.0 * s_const * s_const, ctx);
    rep.constant = s_const;
    rep.measured_constant = (rep.measured_constant / 2.0).sqrt();
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubBallOscillation {
    pub level: usize,
    pub ball: Ball,
    pub mean: f64,
    pub oscillation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BmoReport {
    pub depth: usize,
    pub balls: Vec<SubBallOscillation>,
    pub bmo_norm: f64,
}

/// Sub-balls of radius `R/2^k`, `k ≤ depth`, centered on the line through the origin and
/// `x₀` at spacing `R/2^{k+1}`, contained in `ball`. Centers with equal `|y|` are merged.
pub fn dyadic_family(ball: &Ball, depth: usize) -> Vec<(usize, Ball)> {
    let mut out: Vec<(usize, Ball)> = Vec::new();
    for k in 0..=depth {
        let r = ball.radius / 2f64.powi(k as i32);
        let span = ball.radius - r;
        let steps = (4.0 * span / r).round() as usize;
        let mut seen: Vec<f64> = Vec::new();
        for j in 0..=steps {
            let s = -span + j as f64 * r / 2.0;
            let c = (ball.center_norm + s).abs();
            if seen.iter().any(|&x| (x - c).abs() <= 1e-12 * ball.radius) {
                continue;
            }
            seen.push(c);
            out.push((k, Ball { center_norm: c, radius: r }));
        }
    }
    out
}

fn oscillation(params: &Params, field: &dyn RadialField, ball: &Ball) -> Result<(f64, f64)> {
    let n = params.n;
    let mass = field.ball_integral(n, params.gamma, ball, &|_| 1.0)?;
    let mean = field.ball_integral(n, params.gamma, ball, &|u| u)? / mass;
    let mut osc = field.ball_integral(n, params.gamma, ball, &|u| (u - mean).abs())? / mass;
    if osc <= 1e-13 * mean.abs() {
        osc = 0.0;
    }
    Ok((mean, osc))
}

/// `sup_{B'} μ_γ(B')⁻¹ ∫_{B'} |f − f̄_{B'}|` over the dyadic family of sub-balls of `ball`.
pub fn bmo_gamma(params: &Params, field: &dyn RadialField, ball: &Ball, depth: usize) -> Result<BmoReport> {
    let mut balls = Vec::new();
    let mut norm = 0.0f64;
    for (level, b) in dyadic_family(ball, depth) {
        let (mean, osc) = oscillation(params, field, &b)?;
        norm = norm.max(osc);
        balls.push(SubBallOscillation { level, ball: b, mean, oscillation: osc });
    }
    Ok(BmoReport { depth, balls, bmo_norm: norm })
}

/// Largest `s` with `μ_γ(B)⁻¹∫_B e^{s|f − f̄|} ≤ κ₅`, or `None` when it holds for all `s` tried.
fn john_nirenberg_exponent(params: &Params, field: &dyn RadialField, sub: &SubBallOscillation, kappa5: f64) -> Result<Option<f64>> {
    let n = params.n;
    let mass = field.ball_integral(n, params.gamma, &sub.ball, &|_| 1.0)?;
    let mean = sub.mean;
    let tol = Tolerance { rel: 1e-9, abs: 1e-300, max_pieces: 4000 };
    let avg = |s: f64| -> Result<f64> {
        Ok(field.ball_integral_tol(n, params.gamma, &sub.ball, &|u| (s * (u - mean).abs()).min(700.0).exp(), tol)? / mass)
    };
    let mut hi = 1.0 / sub.oscillation.max(1e-300);
    let mut lo = 0.0;
    let mut tries = 0;
    while avg(hi)? <= kappa5 {
        lo = hi;
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Ok(None);
        }
    }
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if avg(mid)? <= kappa5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo))
}

/// Smallest `κ₆` such that `μ_γ⁻¹∫ e^{s|f−f̄|} ≤ κ₅` for all `s ≤ 1/(κ₆‖f‖_{BMO})`
/// on every sub-ball of the dyadic family.
pub fn john_nirenberg_kappa6(params: &Params, field: &dyn RadialField, ball: &Ball, depth: usize, kappa5: f64) -> Result<f64> {
    let rep = bmo_gamma(params, field, ball, depth)?;
    if rep.bmo_norm == 0.0 {
        return Ok(0.0);
    }
    let mut k6 = 0.0f64;
    for sub in rep.balls.iter().filter(|b| b.oscillation > 1e-14 * rep.bmo_norm) {
        if let Some(s) = john_nirenberg_exponent(params, field, sub, kappa5)? {
            k6 = k6.max(1.0 / (s * rep.bmo_norm));
        }
    }
    Ok(k6)
}

/// Reverse Hölder `‖u‖_{L^s_γ(B)} ≤ κ₇^{2/s} μ_γ(B)^{2/s} ‖u‖_{L^{−s}_γ(B)}` for
/// `0 < s < 1/(κ₆‖log u‖_{BMO})`, with `‖u‖_{L^{−s}} = (∫u^{−s})^{−1/s}`.
pub fn reverse_holder(
    params: &Params,
    field: &dyn RadialField,
    ball: &Ball,
    s: f64,
    log_bmo: f64,
    kappa6: f64,
    kappa7: f64,
) -> Result<CheckReport> {
    let limit = if log_bmo * kappa6 > 0.0 { 1.0 / (kappa6 * log_bmo) } else { f64::INFINITY };
    if !(s > 0.0) || s >= limit {
        return Err(Error::ThresholdExceeded { s, limit });
    }
    let n = params.n;
    let pos = field.ball_integral(n, params.gamma, ball, &|u| u.powf(s))?.powf(1.0 / s);
    let neg = field.ball_integral(n, params.gamma, ball, &|u| u.powf(-s))?.powf(-1.0 / s);
    if !(neg > 0.0) {
        return Err(Error::Domain("field must be positive on the ball".into()));
    }
    let mg = mu(n, params.gamma, ball)?;
    let base = mg.powf(2.0 / s) * neg;
    let ctx = Context::new(params).ball(*ball).value("s", s).value("window", limit).value("log_bmo", log_bmo);
    let mut rep = CheckReport::scaled("reverse_holder", pos, base, kappa7.powf(2.0 / s), ctx);
    rep.constant = kappa7;
    rep.measured_constant = (pos / base).powf(s / 2.0);
    Ok(rep)
}

/// The cut-off `φ = ψ((|x−x₀|/R)^σ)^b` of the Herrero–Pierre estimate, with `ψ` the
/// quintic smoothstep from 1 to 0 between `s_lo` and `s_hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutOff {
    pub params: Params,
    pub ball: Ball,
    pub b: f64,
    pub s_lo: f64,
    pub s_hi: f64,
}

impl CutOff {
    pub fn new(params: &Params, ball: &Ball, b: f64) -> Result<Self> {
        params.require_nonlinear()?;
        let m = params.m;
        if !(b >= 2.0 / (1.0 - m)) {
            return Err(Error::Domain(format!("cut-off power b = {b} must be ≥ 2/(1−m) = {}", 2.0 / (1.0 - m))));
        }
        let sigma = params.sigma();
        let (inner, outer) = if ball.center_norm <= 1.5 * ball.radius { (1.75, 2.0) } else { (1.0, 1.25) };
        Ok(CutOff { params: *params, ball: *ball, b, s_lo: inner_pow(inner, sigma), s_hi: inner_pow(outer, sigma) })
    }

    /// Smallest admissible power `2/(1−m)`.
    pub fn minimal(params: &Params, ball: &Ball) -> Result<Self> {
        Self::new(params, ball, 2.0 / (1.0 - params.m))
    }

    /// `(ψ, ψ', ψ'')` at `s`.
    pub fn psi(&self, s: f64) -> (f64, f64, f64) {
        if s <= self.s_lo {
            return (1.0, 0.0, 0.0);
        }
        if s >= self.s_hi {
            return (0.0, 0.0, 0.0);
        }
        let w = self.s_hi - self.s_lo;
        let z = (s - self.s_lo) / w;
        let step = z * z * z * (10.0 - 15.0 * z + 6.0 * z * z);
        let d1 = 30.0 * z * z * (1.0 - z) * (1.0 - z);
        let d2 = 60.0 * z * (1.0 - z) * (1.0 - 2.0 * z);
        (1.0 - step, -d1 / w, -d2 / (w * w))
    }

    /// Radial support `[ρ_lo, ρ_hi]` of `∇φ` in `ρ = |x − x₀|`.
    pub fn transition(&self) -> (f64, f64) {
        let inv = 1.0 / self.params.sigma();
        (self.ball.radius * self.s_lo.powf(inv), self.ball.radius * self.s_hi.powf(inv))
    }

    pub fn phi(&self, dist: f64) -> f64 {
        let s = (dist / self.ball.radius).powf(self.params.sigma());
        self.psi(s).0.powf(self.b)
    }

    /// `|x|` and `x·(x−x₀)` for `|x−x₀| = ρ` at angle `θ` (given by `cos θ`) from `x₀`.
    fn position(&self, rho: f64, cos_t: f64) -> (f64, f64) {
        let c = self.ball.center_norm;
        let x2 = (c * c + rho * rho + 2.0 * c * rho * cos_t).max(0.0);
        (x2.sqrt(), c * rho * cos_t + rho * rho)
    }

    /// `L_{γ,β} φ = |x|^{γ−β}[Δφ − β x·∇φ/|x|²]`.
    pub fn l_phi(&self, rho: f64, cos_t: f64) -> f64 {
        let p = &self.params;
        let (xn, xy) = self.position(rho, cos_t);
        let sigma = p.sigma();
        let rr = self.ball.radius.powf(sigma);
        let s = rho.powf(sigma) / rr;
        let (psi, d1, d2) = self.psi(s);
        if d1 == 0.0 && d2 == 0.0 {
            return 0.0;
        }
        let s1 = sigma * rho.powf(sigma - 1.0) / rr;
        let s2 = sigma * (sigma - 1.0) * rho.powf(sigma - 2.0) / rr;
        let b = self.b;
        let h1 = b * psi.powf(b - 1.0) * d1 * s1;
        let h2 = b * (b - 1.0) * psi.powf(b - 2.0) * d1 * d1 * s1 * s1 + b * psi.powf(b - 1.0) * (d2 * s1 * s1 + d1 * s2);
        let geo = (p.nf() - 1.0) / rho - p.beta * xy / (rho * xn * xn);
        xn.powf(p.gamma - p.beta) * (h2 + h1 * geo)
    }

    /// `φ^{−m/(1−m)} |L_{γ,β}φ|^{1/(1−m)}` in the factored form that stays finite as `ψ → 0`.
    pub fn q(&self, rho: f64, cos_t: f64) -> f64 {
        let p = &self.params;
        let m = p.m;
        let sigma = p.sigma();
        let rr = self.ball.radius.powf(sigma);
        let s = rho.powf(sigma) / rr;
        if s <= self.s_lo || s >= self.s_hi {
            return 0.0;
        }
        let (psi, d1, d2) = self.psi(s);
        let (xn, xy) = self.position(rho, cos_t);
        let s1 = sigma * rho.powf(sigma - 1.0) / rr;
        let s2 = sigma * (sigma - 1.0) * rho.powf(sigma - 2.0) / rr;
        let b = self.b;
        let geo = (p.nf() - 1.0) / rho - p.beta * xy / (rho * xn * xn);
        let k = (b - 1.0) * d1 * d1 * s1 * s1 + psi * (d2 * s1 * s1 + d1 * s2) + psi * d1 * s1 * geo;
        let e = 1.0 / (1.0 - m);
        xn.powf((p.gamma - p.beta) * e) * b.powf(e) * psi.powf((b * (1.0 - m) - 2.0) * e) * k.abs().powf(e)
    }

    /// Grid maximum of `q` over the transition shell, refined by parabolic interpolation in `ρ`.
    pub fn sup_q(&self) -> f64 {
        let (lo, hi) = self.transition();
        let nr = 801;
        let angles: Vec<f64> = if self.ball.center_norm == 0.0 {
            vec![1.0]
        } else {
            (0..=180).map(|k| (std::f64::consts::PI * k as f64 / 180.0).cos()).collect()
        };
        let h = (hi - lo) / (nr - 1) as f64;
        let mut best = 0.0f64;
        for &ct in &angles {
            let vals: Vec<f64> = (0..nr).map(|i| self.q(lo + i as f64 * h, ct)).collect();
            let (imax, &vmax) = vals.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
            best = best.max(vmax);
            if imax > 0 && imax + 1 < nr {
                let (a, c) = (vals[imax - 1], vals[imax + 1]);
                let denom = a - 2.0 * vmax + c;
                if denom < 0.0 {
                    let off = 0.5 * (a - c) / denom;
                    best = best.max(self.q(lo + (imax as f64 + off) * h, ct));
                }
            }
        }
        best
    }

    /// `∫_{B_{2R}(x₀)} q |x|^{−γ} dx`.
    pub fn integral_q(&self) -> Result<f64> {
        let p = &self.params;
        let n = p.n;
        let (lo, hi) = self.transition();
        let t = Tolerance { rel: 1e-10, abs: 1e-300, max_pieces: 2000 };
        if self.ball.center_norm == 0.0 {
            let e = p.nf() - 1.0 - p.gamma;
            return Ok(sphere_area(n) * integrate(|r| self.q(r, 1.0) * r.powf(e), lo, hi, t)?);
        }
        let k = n as i32 - 2;
        let outer = |rho: f64| -> f64 {
            let inner = integrate(
                |th: f64| {
                    let ct = th.cos();
                    let (xn, _) = self.position(rho, ct);
                    self.q(rho, ct) * xn.powf(-p.gamma) * th.sin().powi(k)
                },
                0.0,
                std::f64::consts::PI,
                t,
            )
            .unwrap_or(f64::NAN);
            inner * rho.powf(p.nf() - 1.0)
        };
        let v = sphere_area(n - 1) * integrate(outer, lo, hi, t)?;
        if !v.is_finite() {
            return Err(Error::QuadratureNonConvergence { a: lo, b: hi, estimate: v, error: f64::NAN });
        }
        Ok(v)
    }
}

fn inner_pow(x: f64, sigma: f64) -> f64 {
    x.powf(sigma)
}

/// `κ₁₀ = sup φ^{−m/(1−m)}|L_{γ,β}φ|^{1/(1−m)} · ρ^{γ,β}_{x₀}(R)^{1/(1−m)}` for the cut-off
/// of power `b` adapted to the ball.
pub fn kappa10_test_function(params: &Params, ball: &Ball, b: f64) -> Result<f64> {
    let cut = CutOff::new(params, ball, b)?;
    Ok(cut.sup_q() * rho(params, ball)?.powf(1.0 / (1.0 - params.m)))
}

/// `(1−m) C(φ) R^σ / μ_γ(B_R(x₀))^{1−m}` with `C(φ) = [∫ φ^{−m/(1−m)}|Lφ|^{1/(1−m)}|x|^{−γ}]^{1−m}`:
/// the smallest constant the cut-off yields in the local mass displacement estimate.
pub fn kappa10_prime_raw(params: &Params, ball: &Ball, b: f64) -> Result<f64> {
    let cut = CutOff::new(params, ball, b)?;
    let m = params.m;
    let c_phi = cut.integral_q()?.powf(1.0 - m);
    Ok((1.0 - m) * c_phi * ball.radius.powf(params.sigma()) / mu(params.n, params.gamma, ball)?.powf(1.0 - m))
}

/// Exponent of `μ_γ(B_{R₀})` in the Sobolev–Poincaré inequality
/// `‖f‖_{L^s_γ} ≤ κ₁₃ μ_γ(B_{R₀})^{σ(1−θ)/(2(N−γ))} ‖∇f‖_{L²_β}`, `θ = p_c/q`.
pub fn kappa13_measure_exponent(params: &Params, q: f64) -> f64 {
    let theta = params.p_c() / q;
    params.sigma() * (1.0 - theta) / (2.0 * (params.nf() - params.gamma))
}

/// `s = 2q/(q+m−1)`.
pub fn kappa13_order(params: &Params, q: f64) -> Result<f64> {
    if !(q > 1.0 && q > params.p_c()) {
        return Err(Error::Domain(format!("need q > max(1, p_c) = {}, got {q}", params.p_c().max(1.0))));
    }
    Ok(2.0 * q / (q + params.m - 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kappa13Estimate {
    pub q: f64,
    pub s: f64,
    /// Discrete maximizer of the Rayleigh-type quotient on the unit ball.
    pub discrete: f64,
    pub iterations: usize,
    /// Largest quotient over the probe family.
    pub probes: f64,
    pub value: f64,
}

/// Measures `κ₁₃` at integrability order `q` on `B_1(0)` (the quotient is scale invariant):
/// nonlinear inverse iteration `A g = W f^{s−1}` for the discrete quotient
/// `(Σ w_i f_i^s)^{1/s} / (fᵀAf)^{1/2}` with Dirichlet data at the outer radius,
/// combined with vanishing probes.
pub fn kappa13(params: &Params, q: f64, cells: usize) -> Result<Kappa13Estimate> {
    let s = kappa13_order(params, q)?;
    let grid = build_grid(params, 0.0, 1.0, cells, Grading::Uniform)?;
    let n = grid.len();
    let (mut a, mut b, mut c) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        let mut d = 0.0;
        if i > 0 {
            d += grid.trans[i - 1];
            a[i] = -grid.trans[i - 1];
        }
        if i + 1 < n {
            d += grid.trans[i];
            c[i] = -grid.trans[i];
        } else {
            d += grid.trans_outer;
        }
        b[i] = d;
    }
    let energy = |f: &[f64]| -> f64 {
        let mut e = grid.trans_outer * f[n - 1] * f[n - 1];
        for i in 0..n - 1 {
            e += grid.trans[i] * (f[i + 1] - f[i]).powi(2);
        }
        e
    };
    let quotient = |f: &[f64]| -> f64 {
        let num: f64 = f.iter().zip(&grid.w_gamma).map(|(v, w)| w * v.abs().powf(s)).sum();
        num.powf(1.0 / s) / energy(f).sqrt()
    };
    let mut f: Vec<f64> = grid.centers.iter().map(|r| 1.0 - r * r).collect();
    let mut j = quotient(&f);
    let mut iters = 0;
    for k in 1..=5000 {
        let mut g: Vec<f64> = f.iter().zip(&grid.w_gamma).map(|(v, w)| w * v.abs().powf(s - 1.0)).collect();
        tridiag(&a, &b, &c, &mut g);
        let norm = energy(&g).sqrt();
        g.iter_mut().for_each(|x| *x /= norm);
        let jn = quotient(&g);
        f = g;
        iters = k;
        let done = (jn - j).abs() <= 1e-13 * jn;
        j = jn;
        if done {
            break;
        }
    }
    let scale = mu(params.n, params.gamma, &Ball::centered(1.0))?.powf(-kappa13_measure_exponent(params, q));
    let discrete = j * scale;
    let mut probes = 0.0f64;
    for f in vanishing_probes(1.0) {
        let num = ball_lp_norm(&f, params.n, params.gamma, &Ball::centered(1.0), s)?;
        let den = on_ball(params.n, params.beta, &f, &Ball::centered(1.0), |_, d| d * d)?.sqrt();
        probes = probes.max(num / den * scale);
    }
    Ok(Kappa13Estimate { q, s, discrete, iterations: iters, probes, value: discrete.max(probes) })
}

fn tridiag(a: &[f64], b: &[f64], c: &[f64], d: &mut [f64]) {
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

/// Probes vanishing at `|x| = radius`.
pub fn vanishing_probes(radius: f64) -> Vec<TestFunction> {
    let mut out = Vec::new();
    for power in [1.0, 2.0, 3.0, 4.0] {
        out.push(TestFunction::new(Profile::Bump { radius, power }));
    }
    for coeffs in [vec![1.0, -0.5], vec![1.0, 0.0, 2.0], vec![0.5, 1.0, -1.0, 0.25]] {
        out.push(TestFunction::new(Profile::PolyBump { radius, coeffs }));
    }
    out
}

/// Fixed probe family for inequalities on a ball of the given radius.
pub fn ball_probes(params: &Params, radius: f64) -> Vec<TestFunction> {
    let mut out = vec![
        TestFunction::new(Profile::Constant { value: 1.0 }),
        TestFunction::new(Profile::Linear { slope: 1.0 / radius }),
    ];
    for k in [0.1, 0.3, 1.0, 3.0] {
        out.push(TestFunction::new(Profile::AubinTalenti { scale: k * radius, exponent: (params.nf() - 2.0) / 2.0 }));
        out.push(TestFunction::new(Profile::Gaussian { scale: k * radius }));
    }
    out.extend(vanishing_probes(radius));
    out.extend(vanishing_probes(radius / 2.0));
    out
}

/// Fixed probe family for the whole-space inequality.
pub fn whole_space_probes(params: &Params) -> Vec<TestFunction> {
    let mut out = Vec::new();
    for k in [0.5, 1.0, 2.0] {
        if params.nf() - 2.0 + params.beta > 0.0 {
            out.push(TestFunction::new(Profile::AubinTalenti { scale: k, exponent: (params.nf() - 2.0) / 2.0 }));
        }
        out.push(TestFunction::new(Profile::AubinTalenti { scale: k, exponent: params.nf() }));
        out.push(TestFunction::new(Profile::Gaussian { scale: k }));
    }
    out.extend(vanishing_probes(1.0));
    out
}

/// Text manifest of every probe family, one probe per line, prefixed by the version.
pub fn probe_manifest(params: &Params) -> String {
    let mut s = format!("version {PROBE_FAMILY_VERSION}\n");
    for (tag, list) in [
        ("ball", ball_probes(params, 1.0)),
        ("space", whole_space_probes(params)),
        ("vanishing", vanishing_probes(1.0)),
    ] {
        for f in list {
            s.push_str(tag);
            s.push(' ');
            s.push_str(&f.manifest_line());
            s.push('\n');
        }
    }
    s
}

pub fn probe_manifest_hash(params: &Params) -> String {
    hex::encode(Sha256::digest(probe_manifest(params).as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Params {
        Params::new(3, 1.0, 0.0, 0.25, 2.0).unwrap()
    }

    #[test]
    fn poly_bump_derivative() {
        let f = TestFunction::new(Profile::PolyBump { radius: 2.0, coeffs: vec![0.5, 1.0, -1.0, 0.25] });
        for r in [0.1, 0.7, 1.3, 1.9] {
            let h = 1e-6;
            let fd = (f.eval(r + h).0 - f.eval(r - h).0) / (2.0 * h);
            assert!((fd - f.eval(r).1).abs() < 1e-8);
        }
    }

    #[test]
    fn cutoff_operator_matches_finite_differences() {
        let params = p();
        let cut = CutOff::minimal(&params, &Ball::centered(1.0)).unwrap();
        let (lo, hi) = cut.transition();
        let r = 0.5 * (lo + hi);
        let h = 1e-4;
        let f = |r: f64| cut.phi(r);
        let d1 = (f(r + h) - f(r - h)) / (2.0 * h);
        let d2 = (f(r + h) - 2.0 * f(r) + f(r - h)) / (h * h);
        // at x₀ = 0: L φ = r^{γ−β}(φ'' + (N−1−β)φ'/r)
        let fd = r.powf(params.gamma - params.beta) * (d2 + (2.0 - params.beta) * d1 / r);
        assert!((fd / cut.l_phi(r, 1.0) - 1.0).abs() < 1e-6);
        let q = f(r).powf(-params.m / (1.0 - params.m)) * cut.l_phi(r, 1.0).abs().powf(1.0 / (1.0 - params.m));
        assert!((q / cut.q(r, 1.0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cutoff_rejects_small_power() {
        assert!(CutOff::new(&p(), &Ball::centered(1.0), 2.0).is_err());
    }

    #[test]
    fn dyadic_family_is_contained() {
        for b in [Ball::centered(1.0), Ball { center_norm: 3.0, radius: 0.5 }] {
            for (_, s) in dyadic_family(&b, 4) {
                assert!(s.radius <= b.radius);
            }
        }
        assert_eq!(dyadic_family(&Ball::centered(1.0), 0).len(), 1);
    }
}
