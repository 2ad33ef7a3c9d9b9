//! Parameter validation and the derived exponents of the weighted fast diffusion
//! equation `u_t = |x|^γ ∇·(|x|^{-β} ∇u^m)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for the strict lower bound `β > γ − 2`.
pub const STRICT_TOL: f64 = 1e-12;

/// Whether the diffusion exponent is in the fast range or equal to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// `0 < m < 1`, accepted everywhere.
    Nonlinear,
    /// `m = 1`, accepted only by the functional inequalities and the linear Hölder formula.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub n: u32,
    pub gamma: f64,
    pub beta: f64,
    pub m: f64,
    pub p: f64,
    pub mode: Mode,
}

impl Params {
    /// Validates `(N, γ, β, m, p)` for the nonlinear equation.
    pub fn new(n: u32, gamma: f64, beta: f64, m: f64, p: f64) -> Result<Self> {
        validate_params(n, gamma, beta, m, p)
    }

    /// Validates the weights only, with `m = 1`.
    pub fn linear(n: u32, gamma: f64, beta: f64) -> Result<Self> {
        check_weights(n, gamma, beta)?;
        Ok(Params { n, gamma, beta, m: 1.0, p: 1.0, mode: Mode::Linear })
    }

    /// Same weights and diffusion exponent with a different integrability order.
    /// The range condition on `p` is not re-checked.
    pub fn with_p(&self, p: f64) -> Self {
        Params { p, ..*self }
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn sigma(&self) -> f64 {
        2.0 + self.beta - self.gamma
    }

    pub fn m_c(&self) -> f64 {
        (self.nf() - 2.0 - self.beta) / (self.nf() - self.gamma)
    }

    /// Critical integrability exponent.
    pub fn p_c(&self) -> f64 {
        (1.0 - self.m) * (self.nf() - self.gamma) / self.sigma()
    }

    /// `1/(σ(p − p_c))` evaluated at an arbitrary order `p`.
    pub fn theta(&self, p: f64) -> f64 {
        1.0 / (self.sigma() * p - (self.nf() - self.gamma) * (1.0 - self.m))
    }

    pub fn r_star(&self) -> f64 {
        2.0 * (self.nf() - self.gamma) / (self.nf() - 2.0 - self.beta)
    }

    pub fn q(&self) -> f64 {
        (self.nf() - self.gamma) / self.sigma()
    }

    pub fn require_nonlinear(&self) -> Result<()> {
        match self.mode {
            Mode::Nonlinear => Ok(()),
            Mode::Linear => Err(Error::Domain("operation requires 0 < m < 1".into())),
        }
    }
}

fn check_weights(n: u32, gamma: f64, beta: f64) -> Result<()> {
    if n < 3 {
        return Err(Error::RangeViolation(format!("N ≥ 3 fails: N = {n}")));
    }
    let nf = n as f64;
    if !gamma.is_finite() || !beta.is_finite() {
        return Err(Error::RangeViolation("weights must be finite".into()));
    }
    if !(gamma < nf) {
        return Err(Error::RangeViolation(format!("γ < N fails: {gamma} < {nf} false")));
    }
    if !(beta - (gamma - 2.0) > STRICT_TOL) {
        return Err(Error::RangeViolation(format!(
            "γ−2 < β fails: {} < {} false",
            gamma - 2.0,
            beta
        )));
    }
    let upper = (nf - 2.0) * gamma / nf;
    if beta > upper + STRICT_TOL {
        return Err(Error::RangeViolation(format!(
            "β ≤ (N−2)γ/N fails: {beta} ≤ {upper} false"
        )));
    }
    Ok(())
}

/// Validates the raw tuple and names the violated inequality on failure.
pub fn validate_params(n: u32, gamma: f64, beta: f64, m: f64, p: f64) -> Result<Params> {
    check_weights(n, gamma, beta)?;
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::RangeViolation(format!("0 < m < 1 fails: m = {m}")));
    }
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::RangeViolation(format!("p ≥ 1 fails: p = {p}")));
    }
    let params = Params { n, gamma, beta, m, p, mode: Mode::Nonlinear };
    let (m_c, p_c) = (params.m_c(), params.p_c());
    if m <= m_c && !(p > p_c) {
        return Err(Error::RangeViolation(format!(
            "p > p_c required for m ≤ m_c fails: p = {p}, p_c = {p_c}"
        )));
    }
    debug_assert!(params.sigma() > 0.0);
    Ok(params)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentSet {
    pub sigma: f64,
    pub m_c: f64,
    pub p_c: f64,
    pub theta_p: f64,
    pub r_star: f64,
    pub q: f64,
}

pub fn exponents(params: &Params) -> ExponentSet {
    ExponentSet {
        sigma: params.sigma(),
        m_c: params.m_c(),
        p_c: params.p_c(),
        theta_p: params.theta(params.p),
        r_star: params.r_star(),
        q: params.q(),
    }
}

/// How the iteration parameter ε is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EpsilonChoice {
    Value(f64),
    /// Largest `(2/r*)^k (1−m)` below the reverse Hölder threshold ν₀.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationExponents {
    pub epsilon: f64,
    pub k_eps: u32,
    pub s_eps: f64,
    pub eta_eps: f64,
    pub zeta_eps: f64,
    pub nu0: f64,
}

/// Threshold ν₀ = c · τ*^{σpϑ_p} m(1−m) H̃_p^{-1/2}, `c` supplied by the ledger.
pub fn nu0(params: &Params, tau_star: f64, hp_tilde: f64, c_nu: f64) -> f64 {
    let e = params.sigma() * params.p * params.theta(params.p);
    c_nu * tau_star.powf(e) * params.m * (1.0 - params.m) / hp_tilde.sqrt()
}

pub fn iteration_exponents(
    params: &Params,
    epsilon: EpsilonChoice,
    tau_star: f64,
    hp_tilde: f64,
    c_nu: f64,
) -> Result<IterationExponents> {
    params.require_nonlinear()?;
    if !(tau_star > 0.0 && tau_star <= 1.0) {
        return Err(Error::Domain(format!("τ* must lie in (0,1], got {tau_star}")));
    }
    if !(hp_tilde >= 1.0) {
        return Err(Error::Domain(format!("H̃_p must be ≥ 1, got {hp_tilde}")));
    }
    let m = params.m;
    let r_star = params.r_star();
    let nu = nu0(params, tau_star, hp_tilde, c_nu);
    let eps = match epsilon {
        EpsilonChoice::Value(e) => e,
        EpsilonChoice::Auto => {
            let mut k = 1;
            let mut e = (2.0 / r_star) * (1.0 - m);
            while !(e < nu) {
                k += 1;
                e = (2.0 / r_star).powi(k) * (1.0 - m);
                if k > 10_000 {
                    return Err(Error::Domain("ν₀ too small for automatic ε".into()));
                }
            }
            e
        }
    };
    if !(eps > 0.0 && eps < 1.0 - m) {
        return Err(Error::Domain(format!("ε must lie in (0, 1−m) = (0, {}), got {eps}", 1.0 - m)));
    }
    let ratio = r_star / 2.0;
    let mut k = 0u32;
    let mut s = eps;
    // relative margin keeps the automatic choice from landing on the boundary by rounding
    while !(s > (1.0 - m) * (1.0 + 1e-12)) {
        k += 1;
        s = ratio.powi(k as i32) * eps;
    }
    let eta = -(params.q() + 1.0) / (s + m - 1.0);
    let zeta = -(1.0 - (2.0 / r_star).powi(k as i32)) / (1.0 - 2.0 / r_star) / eps;
    Ok(IterationExponents { epsilon: eps, k_eps: k, s_eps: s, eta_eps: eta, zeta_eps: zeta, nu0: nu })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unweighted_and_weighted_values() {
        let p = Params::new(3, 0.0, 0.0, 0.5, 1.0).unwrap();
        let e = exponents(&p);
        assert!((e.m_c - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(e.sigma, 2.0);
        assert!((e.r_star - 6.0).abs() < 1e-14);

        let p = Params::new(3, 1.0, 0.0, 0.25, 2.0).unwrap();
        let e = exponents(&p);
        assert!((e.m_c - 0.5).abs() < 1e-15);
        assert!((e.p_c - 1.5).abs() < 1e-15);
        assert!((e.theta_p - 2.0).abs() < 1e-14);
        assert!((e.r_star - 4.0).abs() < 1e-14);
    }

    #[test]
    fn names_violated_inequality() {
        let err = Params::new(3, 1.0, -1.5, 0.5, 2.0).unwrap_err().to_string();
        assert!(err.contains("γ−2 < β"), "{err}");
        let err = Params::new(3, 1.0, -1.0, 0.5, 2.0).unwrap_err().to_string();
        assert!(err.contains("γ−2 < β"), "{err}");
        let err = Params::new(3, 3.0, 0.0, 0.5, 2.0).unwrap_err().to_string();
        assert!(err.contains("γ < N"), "{err}");
        let err = Params::new(3, 0.0, 0.5, 0.5, 2.0).unwrap_err().to_string();
        assert!(err.contains("(N−2)γ/N"), "{err}");
        let err = Params::new(3, 1.0, 0.0, 0.25, 1.2).unwrap_err().to_string();
        assert!(err.contains("p > p_c"), "{err}");
    }

    #[test]
    fn iteration_examples() {
        let p = Params::new(3, 0.0, 0.0, 0.5, 2.0).unwrap();
        let it = iteration_exponents(&p, EpsilonChoice::Value(0.4), 1.0, 1.0, 1.0).unwrap();
        assert_eq!(it.k_eps, 1);
        assert!((it.s_eps - 1.2).abs() < 1e-14);
        let it = iteration_exponents(&p, EpsilonChoice::Value(0.49), 1.0, 1.0, 1.0).unwrap();
        assert_eq!(it.k_eps, 1);
        assert!((it.s_eps - 1.47).abs() < 1e-14);
        assert!(iteration_exponents(&p, EpsilonChoice::Value(0.5), 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn auto_epsilon_lands_below_threshold() {
        let p = Params::new(3, 1.0, 0.0, 0.5, 2.0).unwrap();
        let it = iteration_exponents(&p, EpsilonChoice::Auto, 0.5, 4.0, 1.0).unwrap();
        assert!(it.epsilon < it.nu0);
        assert!((it.s_eps - (1.0 - p.m) * p.r_star() / 2.0).abs() < 1e-12);
    }
}
