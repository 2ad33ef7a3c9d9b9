//! Closed-form solutions: the separable solution that vanishes at a finite time
//! and the weighted Barenblatt (source-type) solution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::sphere_area;
use crate::grid::{Snapshot, WeightedGrid};
use crate::params::Params;
use crate::quadrature::{integrate_graded, integrate_to_infinity, Tolerance};

/// `U(t,x) = c (T−t)^{1/(1−m)} |x|^{−σ/(1−m)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparableSolution {
    pub params: Params,
    pub t_ext: f64,
    pub c: f64,
}

pub fn separable(params: &Params, t_ext: f64) -> Result<SeparableSolution> {
    params.require_nonlinear()?;
    let m = params.m;
    let sigma = params.sigma();
    let bracket = m * sigma * (params.nf() - 2.0 - params.beta - m * sigma / (1.0 - m));
    if !(bracket > 0.0) {
        return Err(Error::Regime(format!(
            "separable amplitude needs mσ(N−2−β−mσ/(1−m)) > 0, got {bracket}"
        )));
    }
    Ok(SeparableSolution { params: *params, t_ext, c: bracket.powf(1.0 / (1.0 - m)) })
}

impl SeparableSolution {
    pub fn value(&self, t: f64, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain("separable solution is singular at r = 0".into()));
        }
        if t >= self.t_ext {
            return Ok(0.0);
        }
        let m = self.params.m;
        Ok(self.c * (self.t_ext - t).powf(1.0 / (1.0 - m)) * r.powf(-self.params.sigma() / (1.0 - m)))
    }
}

/// `B(t,x) = t^a F(|x| t^{−b})` with `F(ξ) = A (D + ξ^σ)^{1/(m−1)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarenblattSolution {
    pub params: Params,
    pub a_coef: f64,
    pub d: f64,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BarenblattChoice {
    D(f64),
    Mass(f64),
}

pub fn barenblatt(params: &Params, choice: BarenblattChoice) -> Result<BarenblattSolution> {
    params.require_nonlinear()?;
    let m = params.m;
    if !(m > params.m_c()) {
        return Err(Error::Regime(format!("Barenblatt solution needs m > m_c = {}", params.m_c())));
    }
    let sigma = params.sigma();
    let k = params.nf() - params.gamma;
    let b = 1.0 / (sigma - k * (1.0 - m));
    let a = -k * b;
    // (F^m)' = −b ξ^{σ−1} F forces A^{m−1} = b(1−m)/(mσ), independent of D
    let a_coef = (m * sigma / (b * (1.0 - m))).powf(1.0 / (1.0 - m));
    let unit = BarenblattSolution { params: *params, a_coef, d: 1.0, a, b };
    let d = match choice {
        BarenblattChoice::D(d) => d,
        BarenblattChoice::Mass(target) => {
            if !(target > 0.0) {
                return Err(Error::Domain(format!("mass must be positive, got {target}")));
            }
            (target / unit.mass()?).powf(1.0 / unit.mass_exponent())
        }
    };
    if !(d > 0.0) {
        return Err(Error::Domain(format!("D must be positive, got {d}")));
    }
    Ok(BarenblattSolution { d, ..unit })
}

impl BarenblattSolution {
    pub fn profile(&self, xi: f64) -> f64 {
        self.a_coef * (self.d + xi.powf(self.params.sigma())).powf(1.0 / (self.params.m - 1.0))
    }

    pub fn value(&self, t: f64, r: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("Barenblatt solution needs t > 0, got {t}")));
        }
        Ok(t.powf(self.a) * self.profile(r * t.powf(-self.b)))
    }

    /// Mass scales as `D^{(N−γ)/σ − 1/(1−m)}`.
    pub fn mass_exponent(&self) -> f64 {
        (self.params.nf() - self.params.gamma) / self.params.sigma() - 1.0 / (1.0 - self.params.m)
    }

    /// Conserved `μ_γ` mass `∫ F(|x|) |x|^{−γ} dx`.
    pub fn mass(&self) -> Result<f64> {
        let e = self.params.nf() - 1.0 - self.params.gamma;
        let tol = Tolerance { rel: 1e-12, abs: 0.0, max_pieces: 4000 };
        let scale = self.d.powf(1.0 / self.params.sigma());
        let head = integrate_graded(|r| self.profile(r) * r.powf(e), 0.0, scale, tol)?;
        let tail = integrate_to_infinity(|r| self.profile(r) * r.powf(e), scale, tol)?;
        Ok(sphere_area(self.params.n) * (head + tail))
    }

    /// `μ_γ` mass of the time slice `B(t,·)` by quadrature in the original variable.
    pub fn mass_at(&self, t: f64) -> Result<f64> {
        let e = self.params.nf() - 1.0 - self.params.gamma;
        let tol = Tolerance { rel: 1e-12, abs: 0.0, max_pieces: 4000 };
        let scale = t.powf(self.b) * self.d.powf(1.0 / self.params.sigma());
        // r = scale·x
        let f = |x: f64| {
            let r = scale * x;
            self.value(t, r).unwrap_or(0.0) * r.powf(e) * scale
        };
        let head = integrate_graded(f, 0.0, 1.0, tol)?;
        let tail = integrate_to_infinity(f, 1.0, tol)?;
        Ok(sphere_area(self.params.n) * (head + tail))
    }

    /// The solution `M B(τ t̂, R x̂)`, `M = (R^σ/τ)^{1/(1−m)}`, which is again Barenblatt.
    pub fn rescaled(&self, radius: f64, tau: f64) -> BarenblattSolution {
        let sigma = self.params.sigma();
        BarenblattSolution { d: self.d * tau.powf(self.b * sigma) / radius.powf(sigma), ..*self }
    }
}

/// Closed-form solutions usable as boundary traces and sampling oracles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Exact {
    Separable(SeparableSolution),
    Barenblatt(BarenblattSolution),
}

impl Exact {
    pub fn params(&self) -> &Params {
        match self {
            Exact::Separable(s) => &s.params,
            Exact::Barenblatt(b) => &b.params,
        }
    }

    pub fn value(&self, t: f64, r: f64) -> Result<f64> {
        match self {
            Exact::Separable(s) => s.value(t, r),
            Exact::Barenblatt(b) => b.value(t, r),
        }
    }

    /// Time and length over which the solution changes by a factor of order one near `(t, r)`.
    pub fn natural_scales(&self, t: f64, r: f64) -> (f64, f64) {
        match self {
            Exact::Separable(s) => (s.t_ext - t, r),
            Exact::Barenblatt(b) => {
                let front = t.powf(b.b) * b.d.powf(1.0 / b.params.sigma());
                (t / (1.0 + b.a.abs() + b.b), r.min(front))
            }
        }
    }
}

/// Values at the cell centers of `grid`.
pub fn sample(solution: &Exact, grid: &WeightedGrid, t: f64) -> Result<Snapshot> {
    let values = grid.centers.iter().map(|&r| solution.value(t, r)).collect::<Result<Vec<_>>>()?;
    Ok(Snapshot { t, values })
}

/// Second-order central-difference residual `u_t − |x|^{γ−β}(v'' + (N−1−β)v'/r)`, `v = u^m`.
pub fn fd_residual(solution: &Exact, t: f64, r: f64, h: f64) -> Result<f64> {
    let p = solution.params();
    let m = p.m;
    let v = |t: f64, r: f64| -> Result<f64> { Ok(solution.value(t, r)?.powf(m)) };
    let ut = (solution.value(t + h, r)? - solution.value(t - h, r)?) / (2.0 * h);
    let (vm, v0, vp) = (v(t, r - h)?, v(t, r)?, v(t, r + h)?);
    let v1 = (vp - vm) / (2.0 * h);
    let v2 = (vp - 2.0 * v0 + vm) / (h * h);
    Ok(ut - r.powf(p.gamma - p.beta) * (v2 + (p.nf() - 1.0 - p.beta) * v1 / r))
}

/// Residual with separate steps in `t` and `r`, and the largest of `|u_t|`, `|x|^{γ−β}|v''|`,
/// `|x|^{γ−β}(N−1−β)|v'|/r`.
fn fd_terms(solution: &Exact, t: f64, r: f64, ht: f64, hr: f64) -> Result<(f64, f64)> {
    let p = solution.params();
    let m = p.m;
    let v = |r: f64| -> Result<f64> { Ok(solution.value(t, r)?.powf(m)) };
    let ut = (solution.value(t + ht, r)? - solution.value(t - ht, r)?) / (2.0 * ht);
    let (vm, v0, vp) = (v(r - hr)?, v(r)?, v(r + hr)?);
    let w = r.powf(p.gamma - p.beta);
    let drift = w * (p.nf() - 1.0 - p.beta) * (vp - vm) / (2.0 * hr) / r;
    let second = w * (vp - 2.0 * v0 + vm) / (hr * hr);
    Ok((ut - second - drift, ut.abs().max(second.abs()).max(drift.abs())))
}

/// Residual relative to the largest term of the equation, from a Richardson table on steps
/// `c·natural_scales(t, r)` halved `levels − 1` times.
pub fn relative_residual(solution: &Exact, t: f64, r: f64, c: f64, levels: usize) -> Result<f64> {
    let (tau, ell) = solution.natural_scales(t, r);
    let mut row: Vec<(f64, f64)> = (0..levels)
        .map(|k| {
            let f = c / 2f64.powi(k as i32);
            fd_terms(solution, t, r, f * tau, f * ell)
        })
        .collect::<Result<_>>()?;
    let mut factor = 4.0;
    while row.len() > 1 {
        row = row.windows(2).map(|w| ((factor * w[1].0 - w[0].0) / (factor - 1.0), (factor * w[1].1 - w[0].1) / (factor - 1.0))).collect();
        factor *= 4.0;
    }
    Ok((row[0].0 / row[0].1).abs())
}

/// Richardson table built from `fd_residual` at `h, h/2, …, h/2^{levels−1}`,
/// eliminating the even error terms; returns the most extrapolated value.
pub fn richardson_residual(solution: &Exact, t: f64, r: f64, h: f64, levels: usize) -> Result<f64> {
    let mut row: Vec<f64> = (0..levels)
        .map(|k| fd_residual(solution, t, r, h / 2f64.powi(k as i32)))
        .collect::<Result<_>>()?;
    let mut factor = 4.0;
    while row.len() > 1 {
        row = row.windows(2).map(|w| (factor * w[1] - w[0]) / (factor - 1.0)).collect();
        factor *= 4.0;
    }
    Ok(row[0])
}

/// `u_t` by the same Richardson table, used to normalize residuals.
pub fn time_derivative(solution: &Exact, t: f64, r: f64, h: f64) -> Result<f64> {
    let d = |h: f64| -> Result<f64> { Ok((solution.value(t + h, r)? - solution.value(t - h, r)?) / (2.0 * h)) };
    let (a, b) = (d(h)?, d(h / 2.0)?);
    Ok((4.0 * b - a) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_amplitude() {
        let p = Params::new(3, 1.0, 0.0, 0.25, 2.0).unwrap();
        let s = separable(&p, 1.0).unwrap();
        assert!((s.c - (1.0f64 / 6.0).powf(4.0 / 3.0)).abs() < 1e-15);
        assert_eq!(s.value(1.0, 0.5).unwrap(), 0.0);
        assert!(s.value(0.5, 0.0).is_err());
    }

    #[test]
    fn regimes_are_exclusive() {
        let p = Params::new(3, 1.0, 0.0, 0.6, 2.0).unwrap();
        assert!(separable(&p, 1.0).is_err());
        assert!(barenblatt(&p, BarenblattChoice::D(1.0)).is_ok());
        let p = Params::new(3, 1.0, 0.0, 0.25, 2.0).unwrap();
        assert!(barenblatt(&p, BarenblattChoice::D(1.0)).is_err());
    }

    #[test]
    fn unweighted_exponents() {
        let p = Params::new(3, 0.0, 0.0, 0.5, 1.0).unwrap();
        let b = barenblatt(&p, BarenblattChoice::D(1.0)).unwrap();
        assert!((b.b - 2.0).abs() < 1e-14);
        assert!((b.a + 6.0).abs() < 1e-13);
    }

    #[test]
    fn mass_target_is_met() {
        let p = Params::new(3, 1.0, 0.0, 0.6, 2.0).unwrap();
        let b = barenblatt(&p, BarenblattChoice::Mass(3.0)).unwrap();
        assert!((b.mass().unwrap() / 3.0 - 1.0).abs() < 1e-10);
    }
}
