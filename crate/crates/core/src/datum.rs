//! Named initial data sampled at cell centers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{barenblatt, separable, BarenblattChoice};
use crate::grid::{Snapshot, WeightedGrid};
use crate::params::Params;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DatumSpec {
    /// `amplitude (1 − (r/radius)²)^power` on `r < radius`.
    Bump { radius: f64, power: f64, amplitude: f64 },
    /// `value` on `r < radius`.
    Characteristic { radius: f64, value: f64 },
    /// Barenblatt solution with parameter `D = d` at time `t`.
    BarenblattSlice { d: f64, t: f64 },
    /// Separable solution with extinction time `t_ext` at time `t`, restricted to `r_min ≤ r ≤ r_max`.
    SeparableSlice { t_ext: f64, t: f64, r_min: f64, r_max: f64 },
    /// Piecewise linear interpolation of `(r, u)` pairs, constant beyond the ends.
    CustomTable { r: Vec<f64>, u: Vec<f64> },
}

impl DatumSpec {
    pub fn value(&self, params: &Params, r: f64) -> Result<f64> {
        Ok(match self {
            DatumSpec::Bump { radius, power, amplitude } => {
                if r < *radius {
                    amplitude * (1.0 - (r / radius).powi(2)).powf(*power)
                } else {
                    0.0
                }
            }
            DatumSpec::Characteristic { radius, value } => {
                if r < *radius {
                    *value
                } else {
                    0.0
                }
            }
            DatumSpec::BarenblattSlice { d, t } => barenblatt(params, BarenblattChoice::D(*d))?.value(*t, r)?,
            DatumSpec::SeparableSlice { t_ext, t, r_min, r_max } => {
                if r < *r_min || r > *r_max {
                    0.0
                } else {
                    separable(params, *t_ext)?.value(*t, r)?
                }
            }
            DatumSpec::CustomTable { r: rs, u } => {
                if rs.len() != u.len() || rs.is_empty() {
                    return Err(Error::Config("custom table needs equally many r and u values".into()));
                }
                if rs.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Config("custom table radii must increase".into()));
                }
                let k = rs.partition_point(|&x| x <= r);
                if k == 0 {
                    u[0]
                } else if k == rs.len() {
                    u[k - 1]
                } else {
                    let w = (r - rs[k - 1]) / (rs[k] - rs[k - 1]);
                    (1.0 - w) * u[k - 1] + w * u[k]
                }
            }
        })
    }

    pub fn sample(&self, params: &Params, grid: &WeightedGrid) -> Result<Snapshot> {
        let values = grid.centers.iter().map(|&r| self.value(params, r)).collect::<Result<Vec<_>>>()?;
        Ok(Snapshot { t: 0.0, values })
    }
}
