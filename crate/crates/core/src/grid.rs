//! Radial cell decomposition with exact weighted cell masses and edge transmissibilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{shell_mu, sphere_area};
use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Grading {
    Uniform,
    /// Consecutive cell widths grow by this factor outward.
    Geometric(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedGrid {
    pub n: u32,
    pub gamma: f64,
    pub beta: f64,
    pub edges: Vec<f64>,
    pub centers: Vec<f64>,
    /// `μ_γ` mass of each cell.
    pub w_gamma: Vec<f64>,
    /// `μ_β` mass of each cell.
    pub w_beta: Vec<f64>,
    /// Interior edge transmissibilities; entry `i` couples cells `i` and `i+1`.
    pub trans: Vec<f64>,
    /// Half-cell transmissibility to the inner boundary (zero at the origin).
    pub trans_inner: f64,
    /// Half-cell transmissibility to the outer boundary.
    pub trans_outer: f64,
}

pub fn build_grid(params: &Params, r_min: f64, r_max: f64, n_cells: usize, grading: Grading) -> Result<WeightedGrid> {
    if !(r_min >= 0.0 && r_min < r_max) {
        return Err(Error::Grading(format!("need 0 ≤ r_min < r_max, got [{r_min}, {r_max}]")));
    }
    if n_cells < 4 {
        return Err(Error::Grading(format!("need at least 4 cells, got {n_cells}")));
    }
    let len = r_max - r_min;
    let mut edges = Vec::with_capacity(n_cells + 1);
    match grading {
        Grading::Uniform => {
            for i in 0..=n_cells {
                edges.push(r_min + len * i as f64 / n_cells as f64);
            }
        }
        Grading::Geometric(q) => {
            if !(q > 0.0) || !q.is_finite() {
                return Err(Error::Grading(format!("geometric ratio must be positive, got {q}")));
            }
            if (q - 1.0).abs() < 1e-14 {
                return build_grid(params, r_min, r_max, n_cells, Grading::Uniform);
            }
            let total = (q.powi(n_cells as i32) - 1.0) / (q - 1.0);
            let mut acc = 0.0;
            edges.push(r_min);
            for i in 0..n_cells {
                acc += q.powi(i as i32);
                edges.push(if i + 1 == n_cells { r_max } else { r_min + len * acc / total });
            }
        }
    }
    from_edges(params, edges)
}

/// Grid from explicit strictly increasing edges.
pub fn from_edges(params: &Params, edges: Vec<f64>) -> Result<WeightedGrid> {
    if edges.len() < 5 {
        return Err(Error::Grading("need at least 4 cells".into()));
    }
    if edges[0] < 0.0 || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Grading("edges must be nonnegative and strictly increasing".into()));
    }
    let n = params.n;
    let nf = params.nf();
    let omega = sphere_area(n);
    let centers: Vec<f64> = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let w_gamma: Vec<f64> = edges.windows(2).map(|w| shell_mu(n, params.gamma, w[0], w[1])).collect();
    let w_beta: Vec<f64> = edges.windows(2).map(|w| shell_mu(n, params.beta, w[0], w[1])).collect();
    let e = nf - 1.0 - params.beta;
    let trans = (0..centers.len() - 1)
        .map(|i| omega * edges[i + 1].powf(e) / (centers[i + 1] - centers[i]))
        .collect();
    let first = edges[0];
    let last = *edges.last().unwrap();
    let trans_inner = if first == 0.0 { 0.0 } else { omega * first.powf(e) / (centers[0] - first) };
    let trans_outer = omega * last.powf(e) / (last - centers[centers.len() - 1]);
    if w_gamma.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::Grading("cell with nonpositive mass".into()));
    }
    Ok(WeightedGrid { n, gamma: params.gamma, beta: params.beta, edges, centers, w_gamma, w_beta, trans, trans_inner, trans_outer })
}

impl WeightedGrid {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn r_min(&self) -> f64 {
        self.edges[0]
    }

    pub fn r_max(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    /// Indices of cells whose centers lie in `|x| < radius` (or `≤` when `closed`).
    pub fn cells_within(&self, radius: f64) -> impl Iterator<Item = usize> + '_ {
        self.centers.iter().enumerate().filter(move |(_, &c)| c <= radius).map(|(i, _)| i)
    }

    /// `μ_γ` of each cell truncated to `|x| < radius`.
    pub fn truncated_gamma_weights(&self, radius: f64) -> Vec<f64> {
        self.truncated(self.gamma, radius)
    }

    pub fn truncated_beta_weights(&self, radius: f64) -> Vec<f64> {
        self.truncated(self.beta, radius)
    }

    fn truncated(&self, alpha: f64, radius: f64) -> Vec<f64> {
        self.edges
            .windows(2)
            .map(|w| if w[0] >= radius { 0.0 } else { shell_mu(self.n, alpha, w[0], w[1].min(radius)) })
            .collect()
    }

    /// Stable identifier of the grid for report contexts.
    pub fn id(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for e in &self.edges {
            h.update(e.to_le_bytes());
        }
        h.update(self.gamma.to_le_bytes());
        h.update(self.beta.to_le_bytes());
        hex::encode(&h.finalize()[..8])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub values: Vec<f64>,
}

impl Snapshot {
    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, &b| a.max(b))
    }

    /// `Σ w_i u_i`, the discrete `μ_γ` mass.
    pub fn mass(&self, grid: &WeightedGrid) -> f64 {
        self.values.iter().zip(&grid.w_gamma).map(|(u, w)| u * w).sum()
    }

    /// Discrete `‖u‖_{L^p_γ}` over `|x| < radius`.
    pub fn lp_norm(&self, grid: &WeightedGrid, p: f64, radius: f64) -> f64 {
        let w = grid.truncated_gamma_weights(radius);
        self.values.iter().zip(&w).map(|(u, w)| w * u.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }

    /// `sup` of the cell values with centers in `|x| ≤ radius`.
    pub fn sup_within(&self, grid: &WeightedGrid, radius: f64) -> f64 {
        grid.cells_within(radius).map(|i| self.values[i]).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn inf_within(&self, grid: &WeightedGrid, radius: f64) -> f64 {
        grid.cells_within(radius).map(|i| self.values[i]).fold(f64::INFINITY, f64::min)
    }
}
