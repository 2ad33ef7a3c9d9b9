//! Radial scalar fields that can be integrated over (possibly off-center) balls.

use crate::error::Result;
use crate::geometry::{radial_ball_integral, radial_ball_integral_tol, shell_weights, Ball};
use crate::grid::{Snapshot, WeightedGrid};
use crate::quadrature::Tolerance;

pub trait RadialField: Sync {
    fn value(&self, r: f64) -> f64;

    /// Radii where the field may jump.
    fn breaks(&self) -> Vec<f64> {
        Vec::new()
    }

    /// `∫_B g(f(|x|)) |x|^{−α} dx`.
    fn ball_integral(&self, n: u32, alpha: f64, ball: &Ball, g: &(dyn Fn(f64) -> f64 + Sync)) -> Result<f64> {
        radial_ball_integral(n, alpha, ball, |r| g(self.value(r)), &self.breaks())
    }

    /// [`RadialField::ball_integral`] with an explicit quadrature tolerance; exact sums ignore it.
    fn ball_integral_tol(&self, n: u32, alpha: f64, ball: &Ball, g: &(dyn Fn(f64) -> f64 + Sync), tol: Tolerance) -> Result<f64> {
        radial_ball_integral_tol(n, alpha, ball, |r| g(self.value(r)), &self.breaks(), tol)
    }
}

/// A closure `r ↦ f(r)`.
pub struct FnField<F>(pub F);

impl<F: Fn(f64) -> f64 + Sync> RadialField for FnField<F> {
    fn value(&self, r: f64) -> f64 {
        (self.0)(r)
    }
}

/// Piecewise-constant cell values, zero outside the grid.
#[derive(Debug, Clone, Copy)]
pub struct CellField<'a> {
    pub grid: &'a WeightedGrid,
    pub values: &'a [f64],
}

impl<'a> CellField<'a> {
    pub fn new(grid: &'a WeightedGrid, snapshot: &'a Snapshot) -> Self {
        CellField { grid, values: &snapshot.values }
    }

    fn cell(&self, r: f64) -> Option<usize> {
        let e = &self.grid.edges;
        if r < e[0] || r > *e.last().unwrap() {
            return None;
        }
        let i = e.partition_point(|&x| x <= r);
        Some(i.saturating_sub(1).min(self.values.len() - 1))
    }
}

impl RadialField for CellField<'_> {
    fn value(&self, r: f64) -> f64 {
        self.cell(r).map(|i| self.values[i]).unwrap_or(0.0)
    }

    fn breaks(&self) -> Vec<f64> {
        self.grid.edges.clone()
    }

    fn ball_integral(&self, n: u32, alpha: f64, ball: &Ball, g: &(dyn Fn(f64) -> f64 + Sync)) -> Result<f64> {
        let w = shell_weights(n, alpha, ball, &self.grid.edges)?;
        Ok(w.iter().zip(self.values).filter(|(w, _)| **w > 0.0).map(|(w, &u)| w * g(u)).sum())
    }

    fn ball_integral_tol(&self, n: u32, alpha: f64, ball: &Ball, g: &(dyn Fn(f64) -> f64 + Sync), _tol: Tolerance) -> Result<f64> {
        self.ball_integral(n, alpha, ball, g)
    }
}

/// `μ_α`-average of `g(f)` over the ball.
pub fn ball_mean(field: &dyn RadialField, n: u32, alpha: f64, ball: &Ball, g: &(dyn Fn(f64) -> f64 + Sync)) -> Result<f64> {
    let mass = field.ball_integral(n, alpha, ball, &|_| 1.0)?;
    Ok(field.ball_integral(n, alpha, ball, g)? / mass)
}

/// `(∫_B |f|^p |x|^{−α})^{1/p}`.
pub fn ball_lp_norm(field: &dyn RadialField, n: u32, alpha: f64, ball: &Ball, p: f64) -> Result<f64> {
    Ok(field.ball_integral(n, alpha, ball, &|u| u.abs().powf(p))?.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::mu;
    use crate::grid::{build_grid, Grading};
    use crate::params::Params;

    #[test]
    fn cell_field_integrates_exactly_on_centered_balls() {
        let p = Params::new(3, 1.0, 0.0, 0.5, 2.0).unwrap();
        let g = build_grid(&p, 0.0, 2.0, 20, Grading::Uniform).unwrap();
        let s = Snapshot { t: 0.0, values: vec![3.0; 20] };
        let f = CellField::new(&g, &s);
        let b = Ball::centered(1.3);
        let v = f.ball_integral(3, 1.0, &b, &|u| u).unwrap();
        assert!((v / (3.0 * mu(3, 1.0, &b).unwrap()) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn off_center_cell_field_matches_closure() {
        let p = Params::new(3, 1.0, 0.0, 0.5, 2.0).unwrap();
        let g = build_grid(&p, 0.0, 4.0, 16, Grading::Uniform).unwrap();
        let s = Snapshot { t: 0.0, values: (0..16).map(|i| 1.0 + i as f64).collect() };
        let f = CellField::new(&g, &s);
        let b = Ball { center_norm: 1.1, radius: 0.9 };
        let exact = f.ball_integral(3, 1.0, &b, &|u| u * u).unwrap();
        let generic = radial_ball_integral(3, 1.0, &b, |r| f.value(r).powi(2), &g.edges).unwrap();
        assert!((exact / generic - 1.0).abs() < 1e-9);
    }
}
