//! Intrinsic datum quantities `H_p`, `H̃_p` and the minimal life time `t*`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::RadialField;
use crate::geometry::{mu, Ball};
use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HpQuantities {
    pub hp: f64,
    pub hp_tilde: f64,
    pub p: f64,
    pub ball: Ball,
    /// `∫_B f |x|^{−γ}`.
    pub l1: f64,
    /// `(∫_B f^p |x|^{−γ})^{1/p}`.
    pub lp: f64,
}

/// ```text
/// H_p = (μ_γ(B_R(x₀))/μ_γ(B_R(0)))^{σϑ_p} [μ_γ(B) ‖f‖_p / (μ_γ(B)^{1/p} ‖f‖_1)]^{pσϑ_p}
/// H̃_p = 1 + ((|x₀|/R) ∨ 1)^{β−γ} H_p^{1−m}
/// ```
pub fn compute_hp(params: &Params, datum: &dyn RadialField, ball: &Ball, p: f64) -> Result<HpQuantities> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("H_p needs p ≥ 1, got {p}")));
    }
    let n = params.n;
    let l1 = datum.ball_integral(n, params.gamma, ball, &|u| u.max(0.0))?;
    if !(l1 > 0.0) {
        return Err(Error::ZeroDatum);
    }
    let lp = datum.ball_integral(n, params.gamma, ball, &|u| u.max(0.0).powf(p))?.powf(1.0 / p);
    let m_ball = mu(n, params.gamma, ball)?;
    let m_origin = mu(n, params.gamma, &Ball::centered(ball.radius))?;
    let st = params.sigma() * params.theta(p);
    let bracket = m_ball * lp / (m_ball.powf(1.0 / p) * l1);
    let hp = (m_ball / m_origin).powf(st) * bracket.powf(p * st);
    let ratio = (ball.center_norm / ball.radius).max(1.0);
    let hp_tilde = 1.0 + ratio.powf(params.beta - params.gamma) * hp.powf(1.0 - params.m);
    Ok(HpQuantities { hp, hp_tilde, p, ball: *ball, l1, lp })
}

/// `κ* = 5^{−1} 2^m κ′₁₀^{−1}`.
pub fn kappa_star(params: &Params, kappa10_prime: f64) -> f64 {
    2f64.powf(params.m) / (5.0 * kappa10_prime)
}

/// `t* = κ* R^σ (‖u₀‖_{L¹_γ(B_R)}/μ_γ(B_R))^{1−m}`; zero for a zero datum.
pub fn minimal_life_time(params: &Params, datum: &dyn RadialField, ball: &Ball, kappa_star: f64) -> Result<f64> {
    let l1 = datum.ball_integral(params.n, params.gamma, ball, &|u| u.max(0.0))?;
    if l1 <= 0.0 {
        return Ok(0.0);
    }
    let avg = l1 / mu(params.n, params.gamma, ball)?;
    Ok(kappa_star * ball.radius.powf(params.sigma()) * avg.powf(1.0 - params.m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FnField;

    #[test]
    fn constant_datum_at_origin() {
        let p = Params::new(3, 1.0, 0.0, 0.25, 2.0).unwrap();
        let h = compute_hp(&p, &FnField(|_| 3.0), &Ball::centered(2.0), 2.0).unwrap();
        assert!((h.hp - 1.0).abs() < 1e-10);
        let t = minimal_life_time(&p, &FnField(|_| 1.0), &Ball::centered(2.0), 0.1).unwrap();
        assert!((t - 0.1 * 2f64.powf(p.sigma())).abs() < 1e-12);
    }

    #[test]
    fn zero_datum() {
        let p = Params::new(3, 1.0, 0.0, 0.25, 2.0).unwrap();
        assert!(matches!(compute_hp(&p, &FnField(|_| 0.0), &Ball::centered(1.0), 2.0), Err(Error::ZeroDatum)));
        assert_eq!(minimal_life_time(&p, &FnField(|_| 0.0), &Ball::centered(1.0), 0.1).unwrap(), 0.0);
    }
}
