//! TOML run configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::datum::DatumSpec;
use crate::error::{Error, Result};
use crate::exact::{barenblatt, separable, BarenblattChoice, Exact};
use crate::grid::{build_grid, Grading, WeightedGrid};
use crate::lab::LedgerOptions;
use crate::params::{validate_params, Params};
use crate::solver::{Boundary, DtPolicy, ProblemSpec, TimeControl};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsBlock,
    pub grid: GridBlock,
    pub problem: ProblemBlock,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckBlock>,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default)]
    pub ledger: LedgerBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsBlock {
    pub n: u32,
    pub gamma: f64,
    pub beta: f64,
    pub m: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    #[serde(default)]
    pub r_min: f64,
    pub r_max: f64,
    pub cells: usize,
    /// Width ratio of consecutive cells; uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometric_ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BcKind {
    Mdp,
    DeltaMdp,
    ZeroFlux,
    /// Dirichlet trace of `problem.exact`.
    ExactTrace,
    /// No solve: `problem.exact` sampled at the output times.
    ExactSample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExactBlock {
    Separable { t_ext: f64 },
    Barenblatt { d: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemBlock {
    pub bc: BcKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// `δ` values of a continuation; one trajectory per value plus the extrapolation.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub deltas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub datum: Option<DatumSpec>,
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub output_times: Vec<f64>,
    #[serde(default)]
    pub record_every: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expect {
    #[default]
    Pass,
    Fail,
}

pub const CHECK_NAMES: [&str; 12] = [
    "smoothing",
    "herrero-pierre",
    "lp-stability",
    "lower-bound",
    "extinction",
    "extinction-time",
    "harnack",
    "energy-upper",
    "energy-intermediate",
    "energy-lower",
    "caccioppoli",
    "bmo-window",
];

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckBlock {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub times: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    /// Overrides the ledger value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    #[serde(default)]
    pub expect: Expect,
}

impl CheckBlock {
    pub fn named(name: &str) -> Self {
        CheckBlock { name: name.to_string(), ..Default::default() }
    }

    pub fn radius(&self) -> f64 {
        self.radius.unwrap_or(1.0)
    }

    fn times_used(&self) -> Vec<f64> {
        let mut v: Vec<f64> = [self.t, self.tau, self.t1].iter().flatten().copied().collect();
        v.extend(&self.times);
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Json, Format::Csv]
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock { dir: None, formats: default_formats() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerBlock {
    /// A previously written ledger; measured afresh when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default)]
    pub calibrate: bool,
    #[serde(default = "default_cells")]
    pub cells_per_radius: usize,
}

fn one() -> f64 {
    1.0
}

fn default_cells() -> usize {
    64
}

impl Default for LedgerBlock {
    fn default() -> Self {
        LedgerBlock { path: None, radius: 1.0, calibrate: false, cells_per_radius: 64 }
    }
}

impl LedgerBlock {
    pub fn options(&self) -> LedgerOptions {
        LedgerOptions { radius: self.radius, calibrate: self.calibrate, cells_per_radius: self.cells_per_radius }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    M,
    P,
    Gamma,
    Beta,
    Radius,
    Eps,
    Delta,
    DatumMass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub axis: Axis,
    pub values: Vec<f64>,
    /// Solve and run the checks at every point; otherwise only exponents and `H̃_p` are tabulated.
    #[serde(default)]
    pub solve: bool,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn params(&self) -> Result<Params> {
        let p = &self.params;
        validate_params(p.n, p.gamma, p.beta, p.m, p.p)
    }

    pub fn grid(&self) -> Result<WeightedGrid> {
        let g = &self.grid;
        let grading = g.geometric_ratio.map_or(Grading::Uniform, Grading::Geometric);
        build_grid(&self.params()?, g.r_min, g.r_max, g.cells, grading)
    }

    pub fn exact(&self) -> Result<Option<Exact>> {
        let params = self.params()?;
        Ok(match self.problem.exact {
            None => None,
            Some(ExactBlock::Separable { t_ext }) => Some(Exact::Separable(separable(&params, t_ext)?)),
            Some(ExactBlock::Barenblatt { d }) => Some(Exact::Barenblatt(barenblatt(&params, BarenblattChoice::D(d))?)),
        })
    }

    /// Output directory: the command-line value, then `WFDE_OUT_DIR`, then `output.dir`, then `out`.
    pub fn out_dir(&self, cli: Option<&Path>) -> std::path::PathBuf {
        if let Some(p) = cli {
            return p.to_path_buf();
        }
        if let Ok(p) = std::env::var("WFDE_OUT_DIR") {
            if !p.is_empty() {
                return p.into();
            }
        }
        self.output.dir.clone().unwrap_or_else(|| "out".into()).into()
    }

    /// Output times in `(t₀, t_end]`, sorted; a default decade-spaced set when none are given.
    pub fn output_times(&self) -> Vec<f64> {
        let t_end = self.problem.t_end;
        let mut ts: Vec<f64> = self.problem.output_times.iter().copied().filter(|&t| t > 0.0 && t <= t_end).collect();
        for c in &self.checks {
            ts.extend(c.times_used().into_iter().filter(|&t| t > 0.0 && t <= t_end));
        }
        if ts.is_empty() {
            ts = (1..=20).map(|k| t_end * k as f64 / 20.0).collect();
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        let params = self.params()?;
        let grid = self.grid()?;
        let pb = &self.problem;
        let bc = match pb.bc {
            BcKind::Mdp => Boundary::Mdp { support: self.support()? },
            BcKind::DeltaMdp => Boundary::DeltaMdp {
                support: self.support()?,
                delta: pb.delta.or(pb.deltas.first().copied()).ok_or_else(|| Error::Config("delta-mdp needs problem.delta".into()))?,
            },
            BcKind::ZeroFlux => Boundary::ZeroFlux,
            BcKind::ExactTrace => Boundary::ExactTrace(self.exact()?.ok_or_else(|| Error::Config("exact-trace needs [problem.exact]".into()))?),
            BcKind::ExactSample => return Err(Error::Config("exact-sample problems are sampled, not solved".into())),
        };
        let initial = match (&pb.datum, self.exact()?) {
            (Some(d), _) => d.sample(&params, &grid)?,
            (None, Some(e)) => crate::exact::sample(&e, &grid, 0.0)?,
            (None, None) => return Err(Error::Config("problem needs a datum or an exact solution".into())),
        };
        let dt = match (pb.dt, pb.dt0) {
            (Some(dt), _) => DtPolicy::Fixed(dt),
            (None, dt0) => {
                let dt0 = dt0.unwrap_or(1e-6 * pb.t_end);
                DtPolicy::Adaptive { dt0, dt_max: pb.dt_max.unwrap_or(pb.t_end / 100.0) }
            }
        };
        let time = TimeControl { t_end: pb.t_end, dt, output_times: self.output_times(), record_every: pb.record_every };
        ProblemSpec::new(params, grid, bc, initial, time)
    }

    fn support(&self) -> Result<f64> {
        self.problem.support.ok_or_else(|| Error::Config("Dirichlet problems need problem.support".into()))
    }

    pub fn validate(&self) -> Result<()> {
        let params = self.params()?;
        self.grid()?;
        let pb = &self.problem;
        if !(pb.t_end > 0.0) {
            return Err(Error::Config(format!("problem.t_end must be positive, got {}", pb.t_end)));
        }
        if matches!(pb.bc, BcKind::ExactTrace | BcKind::ExactSample) && pb.exact.is_none() {
            return Err(Error::Config("this boundary condition needs [problem.exact]".into()));
        }
        if matches!(pb.bc, BcKind::Mdp | BcKind::DeltaMdp | BcKind::ZeroFlux) && pb.datum.is_none() && pb.exact.is_none() {
            return Err(Error::Config("problem needs [problem.datum]".into()));
        }
        if let Some(d) = &pb.datum {
            d.value(&params, 0.5 * (self.grid.r_min + self.grid.r_max))?;
        }
        self.exact()?;
        if pb.deltas.iter().any(|&d| !(d > 0.0)) || pb.delta.is_some_and(|d| !(d > 0.0)) {
            return Err(Error::Config("δ values must be positive".into()));
        }
        for c in &self.checks {
            if !CHECK_NAMES.contains(&c.name.as_str()) {
                return Err(Error::Config(format!("unknown check `{}`; known: {}", c.name, CHECK_NAMES.join(", "))));
            }
            if let Some(t) = c.times_used().into_iter().find(|&t| t < 0.0 || t > pb.t_end) {
                return Err(Error::Config(format!("check `{}` uses time {t} outside [0, t_end = {}]", c.name, pb.t_end)));
            }
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(Error::Config("sweep.values is empty".into()));
            }
        }
        if !(self.ledger.radius > 0.0) {
            return Err(Error::Config("ledger.radius must be positive".into()));
        }
        Ok(())
    }
}
