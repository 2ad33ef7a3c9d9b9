//! Check reports: both sides of an inequality, the installed and the measured constant.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::geometry::Ball;
use crate::params::Params;

/// Default relative slack for `lhs ≤ rhs`.
pub const CHECK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Context {
    pub params: Option<Params>,
    pub ball: Option<Ball>,
    pub times: Vec<f64>,
    pub grid_id: Option<String>,
    /// Additional named scalars (inputs and intermediate quantities).
    pub values: BTreeMap<String, f64>,
}

impl Context {
    pub fn new(params: &Params) -> Self {
        Context { params: Some(*params), ..Default::default() }
    }

    pub fn ball(mut self, ball: Ball) -> Self {
        self.ball = Some(ball);
        self
    }

    pub fn times(mut self, times: &[f64]) -> Self {
        self.times = times.to_vec();
        self
    }

    pub fn grid(mut self, id: String) -> Self {
        self.grid_id = Some(id);
        self
    }

    pub fn value(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.to_string(), v);
        self
    }

    /// First 16 hex digits of the SHA-256 of the JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).unwrap_or_default();
        hex::encode(&Sha256::digest(&bytes)[..8])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub lhs: f64,
    /// Right-hand side evaluated with the installed constant.
    pub rhs: f64,
    pub constant: f64,
    /// Smallest constant for which the inequality holds on this input.
    pub measured_constant: f64,
    pub pass: bool,
    pub tolerance: f64,
    pub context: Context,
}

impl CheckReport {
    /// `lhs ≤ fixed + constant · base`.
    pub fn affine(name: &str, lhs: f64, fixed: f64, base: f64, constant: f64, context: Context) -> Self {
        let rhs = fixed + constant * base;
        let excess = lhs - fixed;
        let measured = if excess <= 0.0 {
            0.0
        } else if base > 0.0 {
            excess / base
        } else {
            f64::INFINITY
        };
        let pass = lhs.is_finite() && lhs <= rhs + CHECK_TOL * rhs.abs().max(fixed.abs());
        CheckReport {
            name: name.to_string(),
            lhs,
            rhs,
            constant,
            measured_constant: measured,
            pass,
            tolerance: CHECK_TOL,
            context,
        }
    }

    /// `lhs ≤ constant · base`.
    pub fn scaled(name: &str, lhs: f64, base: f64, constant: f64, context: Context) -> Self {
        Self::affine(name, lhs, 0.0, base, constant, context)
    }
}

/// Smallest `c ∈ [lo, hi]` with `passes(c)`, by bisection to relative tolerance `rel`.
/// Returns `None` when `passes(hi)` is false.
pub fn smallest_passing_constant<F: Fn(f64) -> bool>(passes: F, lo: f64, hi: f64, rel: f64) -> Option<f64> {
    if !passes(hi) {
        return None;
    }
    if passes(lo) {
        return Some(lo);
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > rel * b {
        let mid = 0.5 * (a + b);
        if passes(mid) {
            b = mid;
        } else {
            a = mid;
        }
    }
    Some(b)
}

pub fn write_json(path: &Path, reports: &[CheckReport]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, reports)?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Summary with columns `name, lhs, rhs, constant, measured_constant, pass, context_hash`.
pub fn write_csv(path: &Path, reports: &[CheckReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["name", "lhs", "rhs", "constant", "measured_constant", "pass", "context_hash"])?;
    for r in reports {
        w.write_record([
            r.name.clone(),
            r.lhs.to_string(),
            r.rhs.to_string(),
            r.constant.to_string(),
            r.measured_constant.to_string(),
            r.pass.to_string(),
            r.context.hash(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_measured_constant() {
        let r = CheckReport::affine("x", 5.0, 1.0, 2.0, 3.0, Context::default());
        assert_eq!(r.measured_constant, 2.0);
        assert!(r.pass);
        let r = CheckReport::affine("x", 5.0, 1.0, 2.0, 1.5, Context::default());
        assert!(!r.pass);
    }

    #[test]
    fn bisection_agrees_with_closed_form() {
        let c = smallest_passing_constant(|c| 5.0 <= 1.0 + c * 2.0, 0.0, 100.0, 1e-4).unwrap();
        assert!((c / 2.0 - 1.0).abs() < 1e-4);
    }
}
