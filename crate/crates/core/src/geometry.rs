//! Weighted measures of balls, the intrinsic scale function, annulus geometry
//! factors, scenario classification, cylinders and parabolic quasi-distances.
//!
//! Off-center balls are reduced to one-dimensional radial integrals: the sphere
//! of radius `r` about the origin meets `B_R(x₀)` in a spherical cap whose area
//! has a closed form in the cap angle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Params;
use crate::quadrature::{gk15, integrate_graded, Tolerance};

/// `|S^{n−1}|`, the surface area of the unit sphere in `ℝ^n`.
pub fn sphere_area(n: u32) -> f64 {
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        _ => 2.0 * std::f64::consts::PI / (n as f64 - 2.0) * sphere_area(n - 2),
    }
}

/// `∫_0^θ sin^k` from `1 − cos θ` and `1 + cos θ`, both supplied without cancellation.
fn sin_power_integral(k: u32, one_minus: f64, one_plus: f64) -> f64 {
    let one_minus = one_minus.clamp(0.0, 2.0);
    let one_plus = one_plus.clamp(0.0, 2.0);
    let theta = if one_minus <= one_plus {
        2.0 * (0.5 * one_minus).sqrt().asin()
    } else {
        std::f64::consts::PI - 2.0 * (0.5 * one_plus).sqrt().asin()
    };
    if k == 0 {
        return theta;
    }
    if k == 1 {
        return one_minus;
    }
    if theta < 1.0 {
        return gk15(&|x: f64| x.sin().powi(k as i32), 0.0, theta).0;
    }
    let kappa = 1.0 - one_minus;
    let s = (one_minus * one_plus).sqrt();
    let mut even = theta;
    let mut odd = one_minus;
    for n in 2..=k {
        let nf = n as f64;
        let prev = if n % 2 == 0 { even } else { odd };
        let v = -s.powi(n as i32 - 1) * kappa / nf + (nf - 1.0) / nf * prev;
        if n % 2 == 0 {
            even = v;
        } else {
            odd = v;
        }
    }
    if k % 2 == 0 {
        even
    } else {
        odd
    }
}

/// Area of `{ω ∈ S^{n−1} : |rω − x₀| < R}` with `|x₀| = c > 0`.
pub fn cap_area(n: u32, r: f64, c: f64, radius: f64) -> f64 {
    if r <= 0.0 {
        return if c < radius { sphere_area(n) } else { 0.0 };
    }
    let den = 2.0 * r * c;
    let one_minus = (radius - r + c) * (radius + r - c) / den;
    let one_plus = (r + c - radius) * (r + c + radius) / den;
    if one_plus <= 0.0 {
        return sphere_area(n);
    }
    if one_minus <= 0.0 {
        return 0.0;
    }
    sphere_area(n - 1) * sin_power_integral(n - 2, one_minus, one_plus)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center_norm: f64,
    pub radius: f64,
}

impl Ball {
    pub fn new(center_norm: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !(center_norm >= 0.0) {
            return Err(Error::Geometry(format!(
                "ball needs radius > 0 and |x0| ≥ 0, got ({center_norm}, {radius})"
            )));
        }
        Ok(Ball { center_norm, radius })
    }

    pub fn centered(radius: f64) -> Self {
        Ball { center_norm: 0.0, radius }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Ball { center_norm: self.center_norm, radius: self.radius * factor }
    }

    /// Radial range `[r_lo, r_hi]` met by the ball.
    pub fn radial_range(&self) -> (f64, f64) {
        ((self.center_norm - self.radius).max(0.0), self.center_norm + self.radius)
    }
}

fn quad_tol() -> Tolerance {
    Tolerance { rel: 1e-12, abs: 1e-300, max_pieces: 2000 }
}

/// `∫_B g(|x|) |x|^{−α} dx` for a radial integrand.
///
/// `breaks` lists radii where `g` may be discontinuous.
pub fn radial_ball_integral<G: Fn(f64) -> f64>(
    n: u32,
    alpha: f64,
    ball: &Ball,
    g: G,
    breaks: &[f64],
) -> Result<f64> {
    radial_ball_integral_tol(n, alpha, ball, g, breaks, quad_tol())
}

/// [`radial_ball_integral`] with an explicit quadrature tolerance.
pub fn radial_ball_integral_tol<G: Fn(f64) -> f64>(
    n: u32,
    alpha: f64,
    ball: &Ball,
    g: G,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<f64> {
    let nf = n as f64;
    if !(alpha < nf) {
        return Err(Error::Domain(format!("weight exponent α = {alpha} must be < N")));
    }
    let c = ball.center_norm;
    let big = ball.radius;
    let e = nf - 1.0 - alpha;
    let omega = sphere_area(n);
    let mut total = 0.0;
    let full = (big - c).max(0.0);
    let cuts = |lo: f64, hi: f64| -> Vec<f64> {
        let mut pts = vec![lo];
        pts.extend(breaks.iter().copied().filter(|&b| b > lo && b < hi));
        pts.push(hi);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    };
    if full > 0.0 {
        let pts = cuts(0.0, full);
        for w in pts.windows(2) {
            total += omega * integrate_graded(|r| g(r) * r.powf(e), w[0], w[1], tol)?;
        }
    }
    if c > 0.0 {
        let lo = (c - big).abs();
        let hi = c + big;
        let pts = cuts(lo, hi);
        for w in pts.windows(2) {
            total += integrate_graded(
                |r| {
                    let a = cap_area(n, r, c, big);
                    if a == 0.0 {
                        0.0
                    } else {
                        g(r) * r.powf(e) * a
                    }
                },
                w[0],
                w[1],
                tol,
            )?;
        }
    }
    Ok(total)
}

/// `μ_α(B) = ∫_B |x|^{−α} dx`.
pub fn mu(n: u32, alpha: f64, ball: &Ball) -> Result<f64> {
    let nf = n as f64;
    if !(alpha < nf) {
        return Err(Error::Domain(format!("weight exponent α = {alpha} must be < N")));
    }
    if ball.center_norm == 0.0 {
        return Ok(sphere_area(n) * ball.radius.powf(nf - alpha) / (nf - alpha));
    }
    radial_ball_integral(n, alpha, ball, |_| 1.0, &[])
}

/// `μ_α` of the origin-centered shell `a < |x| < b`.
pub fn shell_mu(n: u32, alpha: f64, a: f64, b: f64) -> f64 {
    let k = n as f64 - alpha;
    sphere_area(n) * (b.powf(k) - a.powf(k)) / k
}

/// Per-cell `μ_α` of `B ∩ {e_i < |x| < e_{i+1}}` for consecutive `edges`.
pub fn shell_weights(n: u32, alpha: f64, ball: &Ball, edges: &[f64]) -> Result<Vec<f64>> {
    let (lo, hi) = ball.radial_range();
    let c = ball.center_norm;
    let big = ball.radius;
    let full = (big - c).max(0.0);
    let e = n as f64 - 1.0 - alpha;
    let mut out = vec![0.0; edges.len().saturating_sub(1)];
    for (i, w) in edges.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        if b <= lo || a >= hi {
            continue;
        }
        let mut v = 0.0;
        let fa = a.min(full);
        let fb = b.min(full);
        if fb > fa {
            v += shell_mu(n, alpha, fa, fb);
        }
        if c > 0.0 {
            let ca = a.max((c - big).abs());
            let cb = b.min(hi);
            if cb > ca {
                v += integrate_graded(|r| r.powf(e) * cap_area(n, r, c, big), ca, cb, quad_tol())?;
            }
        }
        out[i] = v;
    }
    Ok(out)
}

/// Exponent `α` such that `ρ = μ_α(B)^{2/N}`.
pub fn rho_alpha(params: &Params) -> f64 {
    (params.gamma - params.beta) * params.nf() / 2.0
}

/// The intrinsic scale `ρ(B) = (∫_B |x|^{(β−γ)N/2} dx)^{2/N}`.
pub fn rho(params: &Params, ball: &Ball) -> Result<f64> {
    Ok(mu(params.n, rho_alpha(params), ball)?.powf(2.0 / params.nf()))
}

/// Inverse of `R ↦ ρ(B_R(x₀))` by bisection in `log R`.
pub fn rho_inverse(params: &Params, center_norm: f64, s: f64) -> Result<f64> {
    if s == 0.0 {
        return Ok(0.0);
    }
    if !(s > 0.0) {
        return Err(Error::Domain(format!("ρ⁻¹ needs s > 0, got {s}")));
    }
    let f = |r: f64| rho(params, &Ball { center_norm, radius: r });
    let mut guess = if center_norm > 0.0 { center_norm } else { 1.0 };
    let mut lo = guess;
    let mut hi = guess;
    if f(guess)? < s {
        while f(hi)? < s {
            lo = hi;
            hi *= 2.0;
        }
    } else {
        while f(lo)? >= s {
            hi = lo;
            lo *= 0.5;
        }
    }
    for _ in 0..200 {
        guess = (lo * hi).sqrt();
        if hi / lo - 1.0 < 1e-14 {
            break;
        }
        if f(guess)? < s {
            lo = guess;
        } else {
            hi = guess;
        }
    }
    Ok((lo * hi).sqrt())
}

/// Annulus geometry factor `h_σ(R₀, R₁, x₀)`.
pub fn h_sigma(sigma: f64, r0: f64, r1: f64, center_norm: f64) -> Result<f64> {
    if !(r1 > 0.0 && r1 < r0) {
        return Err(Error::Geometry(format!("need 0 < R1 < R0, got R1 = {r1}, R0 = {r0}")));
    }
    let c = center_norm;
    if sigma < 2.0 {
        return Ok(((r0 + c) / (r0 - r1)).powf(2.0 - sigma));
    }
    if c < r1 {
        Ok(((r0 - r1) / (r1 - c)).powf(sigma - 2.0).max(1.0))
    } else if c > r0 {
        Ok(((r0 - r1) / (c - r0)).powf(sigma - 2.0).max(1.0))
    } else {
        Err(Error::Geometry(format!(
            "origin lies in the closed annulus R1 = {r1} ≤ |x0| = {c} ≤ R0 = {r0}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    S1,
    S2,
    S3,
    Out,
}

pub fn classify_scenario(ball: &Ball) -> Scenario {
    let c = ball.center_norm;
    let r = ball.radius;
    if c == 0.0 {
        Scenario::S1
    } else if c / 32.0 <= r && r <= c / 16.0 {
        Scenario::S2
    } else if 2.5 * c <= r && r <= 4.0 * c {
        Scenario::S3
    } else {
        Scenario::Out
    }
}

/// Space-time point with a signed radial coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub t: f64,
    pub x: f64,
}

/// `|x−y| ∨ ρ⁻¹_{(x+y)/2}(|t−s|)`.
pub fn quasi_distance(params: &Params, a: SpaceTimePoint, b: SpaceTimePoint) -> Result<f64> {
    let dx = (a.x - b.x).abs();
    let dt = (a.t - b.t).abs();
    if dt == 0.0 {
        return Ok(dx);
    }
    let mid = (a.x + b.x).abs() / 2.0;
    Ok(dx.max(rho_inverse(params, mid, dt)?))
}

/// `|x−y| + |t−s|^{1/(2∨σ)}`.
pub fn standard_quasi_distance(sigma: f64, a: SpaceTimePoint, b: SpaceTimePoint) -> f64 {
    (a.x - b.x).abs() + (a.t - b.t).abs().powf(1.0 / sigma.max(2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CylinderKind {
    Full,
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub t_end: f64,
    pub ball: Ball,
    pub kind: CylinderKind,
}

pub fn make_cylinder(kind: CylinderKind, t_end: f64, ball: Ball) -> Cylinder {
    Cylinder { t_end, ball, kind }
}

impl Cylinder {
    /// Time interval `(t_a, t_b]` of the cylinder.
    pub fn time_interval(&self, params: &Params) -> Result<(f64, f64)> {
        let r = rho(params, &self.ball)?;
        let t0 = self.t_end;
        Ok(match self.kind {
            CylinderKind::Full => (t0 - r, t0),
            CylinderKind::Forward => (t0 - r / 4.0, t0),
            CylinderKind::Backward => (t0 - 7.0 * r / 8.0, t0 - 5.0 * r / 8.0),
        })
    }

    /// Spatial radius of the cylinder.
    pub fn spatial_radius(&self) -> f64 {
        match self.kind {
            CylinderKind::Full => 2.0 * self.ball.radius,
            _ => self.ball.radius / 2.0,
        }
    }

    pub fn contains_cylinder(&self, params: &Params, other: &Cylinder) -> Result<bool> {
        let (a, b) = self.time_interval(params)?;
        let (c, d) = other.time_interval(params)?;
        let same_center = (self.ball.center_norm - other.ball.center_norm).abs() <= 1e-15;
        Ok(same_center && c >= a - 1e-12 * a.abs().max(1.0) && d <= b && other.spatial_radius() <= self.spatial_radius())
    }
}

/// Two-sided constant of a family of ratios: `max(sup r, 1/inf r)`.
pub fn two_sided(ratios: &[f64]) -> f64 {
    ratios.iter().fold(1.0f64, |k, &r| k.max(r).max(1.0 / r))
}

/// `R² μ_γ(B)/μ_β(B)`.
pub fn measure_scale(params: &Params, ball: &Ball) -> Result<f64> {
    Ok(ball.radius * ball.radius * mu(params.n, params.gamma, ball)? / mu(params.n, params.beta, ball)?)
}

/// Ratio `(R² μ_γ/μ_β) / ρ`, bounded above and below by `κ₁₆`.
pub fn ratio_k16(params: &Params, ball: &Ball) -> Result<f64> {
    Ok(measure_scale(params, ball)? / rho(params, ball)?)
}

/// Ratio `(R² μ_γ/μ_β) / R^σ`, bounded by `κ₁₇` in scenarios S1–S3.
pub fn ratio_k17(params: &Params, ball: &Ball) -> Result<f64> {
    Ok(measure_scale(params, ball)? / ball.radius.powf(params.sigma()))
}

/// Ratio `ρ / (R² (R ∨ |x₀|)^{β−γ})`, bounded by `κ₁₈`.
pub fn ratio_k18(params: &Params, ball: &Ball) -> Result<f64> {
    let r = ball.radius;
    Ok(rho(params, ball)? / (r * r * r.max(ball.center_norm).powf(params.beta - params.gamma)))
}

/// Ratio `ρ⁻¹(s) / (s^{1/2} (s^{1/σ} ∨ |x₀|)^{(γ−β)/2})`, bounded by `κ₁₉`.
pub fn ratio_k19(params: &Params, center_norm: f64, s: f64) -> Result<f64> {
    let inv = rho_inverse(params, center_norm, s)?;
    let scale = s.sqrt() * s.powf(1.0 / params.sigma()).max(center_norm).powf((params.gamma - params.beta) / 2.0);
    Ok(inv / scale)
}

/// Sample balls of radius `radius` in scenario `sc`, spread over its admissible centers.
pub fn scenario_balls(sc: Scenario, radius: f64, count: usize) -> Vec<Ball> {
    let (lo, hi) = match sc {
        Scenario::S1 => return vec![Ball::centered(radius)],
        Scenario::S2 => (16.0 * radius, 32.0 * radius),
        Scenario::S3 => (radius / 4.0, radius / 2.5),
        Scenario::Out => (0.6 * radius, 15.0 * radius),
    };
    let count = count.max(2);
    (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            Ball { center_norm: lo * (hi / lo).powf(t), radius }
        })
        .collect()
}

/// `μ_γ(B_{2R}(x₀)) / μ_γ(B_R(x₀))`.
pub fn doubling_ratio(params: &Params, ball: &Ball) -> Result<f64> {
    Ok(mu(params.n, params.gamma, &ball.scaled(2.0))? / mu(params.n, params.gamma, ball)?)
}

/// Smallest `A ≥ 4` (to 1e−4 relative) with `ρ(B_{R/A}) ≤ ρ(B_R)/4` at this ball,
/// which makes `Q_{R/A} ⊂ Q_R⁺`.
pub fn inclusion_factor(params: &Params, ball: &Ball) -> Result<f64> {
    let target = rho(params, ball)? / 4.0;
    let ok = |a: f64| -> Result<bool> { Ok(rho(params, &ball.scaled(1.0 / a))? <= target) };
    if ok(4.0)? {
        return Ok(4.0);
    }
    let mut lo = 4.0;
    let mut hi = 8.0;
    while !ok(hi)? {
        lo = hi;
        hi *= 2.0;
    }
    while hi / lo - 1.0 > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Sufficient inclusion factor `4 ∨ 2κ₁₈ ∨ (4κ₁₈²)^{1/σ}`.
pub fn inclusion_factor_bound(params: &Params, kappa18: f64) -> f64 {
    4.0f64.max(2.0 * kappa18).max((4.0 * kappa18 * kappa18).powf(1.0 / params.sigma()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-15);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn cap_area_matches_archimedes_in_three_dimensions() {
        // N = 3: cap area is 2π(1 − cos θ)
        let (r, c, big) = (1.0, 1.5, 1.0);
        let kappa: f64 = (r * r + c * c - big * big) / (2.0 * r * c);
        assert!((cap_area(3, r, c, big) - 2.0 * PI * (1.0 - kappa)).abs() < 1e-14);
    }

    #[test]
    fn off_center_unweighted_volume() {
        for n in 3..=6 {
            let b = Ball { center_norm: 0.7, radius: 1.3 };
            let v = mu(n, 0.0, &b).unwrap();
            let exact = sphere_area(n) * 1.3f64.powi(n as i32) / n as f64;
            assert!((v / exact - 1.0).abs() < 1e-10, "n = {n}: {v} vs {exact}");
        }
    }

    #[test]
    fn h_sigma_branches() {
        assert_eq!(h_sigma(2.0, 2.0, 1.0, 0.0).unwrap(), 1.0);
        assert_eq!(h_sigma(2.0, 2.0, 1.0, 5.0).unwrap(), 1.0);
        assert!((h_sigma(1.0, 2.0, 1.0, 0.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(h_sigma(2.5, 2.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn scenarios() {
        assert_eq!(classify_scenario(&Ball { center_norm: 0.0, radius: 7.0 }), Scenario::S1);
        assert_eq!(classify_scenario(&Ball { center_norm: 32.0, radius: 1.5 }), Scenario::S2);
        assert_eq!(classify_scenario(&Ball { center_norm: 1.0, radius: 3.0 }), Scenario::S3);
        assert_eq!(classify_scenario(&Ball { center_norm: 1.0, radius: 1.0 }), Scenario::Out);
    }
}
