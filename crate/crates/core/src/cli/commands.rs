//! Subcommand implementations. Each returns the process exit code.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{Axis, BcKind, CheckBlock, Expect, Format, RunConfig};
use crate::datum::DatumSpec;
use crate::error::{Error, Result};
use crate::exact::{barenblatt, fd_residual, relative_residual, separable, BarenblattChoice, Exact};
use crate::field::CellField;
use crate::geometry::Ball;
use crate::grid::{build_grid, Grading};
use crate::inequalities::kappa13;
use crate::io::{write_trajectory_csv, write_trajectory_json};
use crate::lab::*;
use crate::params::{exponents, Params};
use crate::report::{write_csv, write_json, CheckReport, Context};
use crate::solver::{run, run_delta_continuation, Boundary, DtPolicy, ProblemSpec, TimeControl, Trajectory};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_CHECK: i32 = 4;

/// Flags shared by all subcommands.
#[derive(Debug, Clone, Default)]
pub struct Globals {
    pub out: Option<PathBuf>,
    pub strict: bool,
    pub seed: u64,
    pub jobs: Option<usize>,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::RangeViolation(_) | Error::Regime(_) | Error::Domain(_) | Error::Geometry(_) | Error::Grading(_) => EXIT_CONFIG,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => EXIT_IO,
        _ => EXIT_SOLVER,
    }
}

fn fail(e: Error) -> i32 {
    eprintln!("error: {e}");
    exit_code(&e)
}

fn io<T>(r: std::io::Result<T>) -> Result<T> {
    Ok(r?)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    config_sha256: Option<String>,
    config: Option<&'a RunConfig>,
    seed: u64,
    jobs: Option<usize>,
    files: Vec<String>,
    /// Seconds since the Unix epoch; the only wall-clock value in any artifact.
    timestamp: u64,
}

fn write_manifest(dir: &Path, command: &str, cfg: Option<&RunConfig>, g: &Globals, files: &[String]) -> Result<()> {
    let config_sha256 = match cfg {
        Some(c) => Some(sha256_hex(c.to_toml()?.as_bytes())),
        None => None,
    };
    let timestamp = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let m = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config_sha256,
        config: cfg,
        seed: g.seed,
        jobs: g.jobs,
        files: files.to_vec(),
        timestamp,
    };
    io(std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&m)?))
}

fn write_trajectory(dir: &Path, stem: &str, traj: &Trajectory, cfg: &RunConfig, files: &mut Vec<String>) -> Result<()> {
    for f in &cfg.output.formats {
        let name = match f {
            Format::Json => format!("{stem}.json"),
            Format::Csv => format!("{stem}.csv"),
        };
        match f {
            Format::Json => write_trajectory_json(&dir.join(&name), traj)?,
            Format::Csv => write_trajectory_csv(&dir.join(&name), traj)?,
        }
        files.push(name);
    }
    Ok(())
}

fn write_reports(dir: &Path, stem: &str, reports: &[CheckReport], cfg: Option<&RunConfig>, files: &mut Vec<String>) -> Result<()> {
    let formats = cfg.map(|c| c.output.formats.clone()).unwrap_or_else(|| vec![Format::Json, Format::Csv]);
    for f in formats {
        match f {
            Format::Json => {
                write_json(&dir.join(format!("{stem}.json")), reports)?;
                files.push(format!("{stem}.json"));
            }
            Format::Csv => {
                write_csv(&dir.join(format!("{stem}.csv")), reports)?;
                files.push(format!("{stem}.csv"));
            }
        }
    }
    Ok(())
}

/// Result of solving (or sampling) the configured problem.
pub struct Solved {
    pub main: Trajectory,
    /// Lifted members of a continuation, by `δ`.
    pub members: Vec<(f64, Trajectory)>,
    pub spec: Option<ProblemSpec>,
}

pub fn solve(cfg: &RunConfig) -> Result<Solved> {
    if cfg.problem.bc == BcKind::ExactSample {
        let exact = cfg.exact()?.ok_or_else(|| Error::Config("exact-sample needs [problem.exact]".into()))?;
        let mut times = cfg.output_times();
        if matches!(exact, Exact::Separable(_)) {
            times.insert(0, 0.0);
        }
        let traj = exact_trajectory(&exact, &cfg.grid()?, &times)?;
        return Ok(Solved { main: traj, members: Vec::new(), spec: None });
    }
    let spec = cfg.problem_spec()?;
    if !cfg.problem.deltas.is_empty() {
        if !matches!(spec.bc, Boundary::DeltaMdp { .. }) {
            return Err(Error::Config("problem.deltas needs bc = \"delta-mdp\"".into()));
        }
        let dc = run_delta_continuation(&spec, &cfg.problem.deltas)?;
        let members = dc.deltas.iter().copied().zip(dc.runs).collect();
        return Ok(Solved { main: dc.extrapolated, members, spec: Some(spec) });
    }
    let traj = run(&spec)?;
    Ok(Solved { main: traj, members: Vec::new(), spec: Some(spec) })
}

pub fn cmd_simulate(cfg: &RunConfig, g: &Globals) -> i32 {
    let dir = cfg.out_dir(g.out.as_deref());
    if let Err(e) = std::fs::create_dir_all(&dir) {
        return fail(e.into());
    }
    let solved = match solve(cfg) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let mut files = Vec::new();
    let res = (|| -> Result<()> {
        write_trajectory(&dir, "trajectory", &solved.main, cfg, &mut files)?;
        for (k, (_, t)) in solved.members.iter().enumerate() {
            write_trajectory(&dir, &format!("trajectory_delta_{k}"), t, cfg, &mut files)?;
        }
        write_manifest(&dir, "simulate", Some(cfg), g, &files)
    })();
    match res {
        Ok(()) => EXIT_OK,
        Err(e) => fail(e),
    }
}

/// Ledger constants on demand: loaded from `ledger.path`, else measured once, with solver
/// calibration only when a calibrated constant is requested.
pub struct Constants {
    params: Params,
    block: super::config::LedgerBlock,
    ledger: Option<ConstantLedger>,
}

const CALIBRATED: [&str; 12] =
    ["kappa1", "kappa2", "kappa12", "c_p", "c1", "c2", "c3", "c_caccioppoli", "c_bmo", "kappa_lower", "kappa3", "herrero_pierre_check"];

impl Constants {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let params = cfg.params()?;
        let ledger = match &cfg.ledger.path {
            Some(p) => Some(serde_json::from_str::<ConstantLedger>(&std::fs::read_to_string(p)?)?),
            None => None,
        };
        Ok(Constants { params, block: cfg.ledger.clone(), ledger })
    }

    pub fn get(&mut self, name: &str) -> Result<f64> {
        if self.ledger.as_ref().map_or(true, |l| !l.entries.contains_key(name)) {
            if self.block.path.is_some() {
                return Err(Error::Config(format!("constant `{name}` is not in the loaded ledger")));
            }
            let mut opts = self.block.options();
            opts.calibrate |= CALIBRATED.contains(&name);
            self.ledger = Some(measure_ledger(&self.params, &opts)?);
        }
        self.ledger.as_ref().unwrap().get(name)
    }

    pub fn ledger(&self) -> Option<&ConstantLedger> {
        self.ledger.as_ref()
    }
}

fn need<T>(v: Option<T>, check: &str, field: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("check `{check}` needs `{field}`")))
}

fn constant(c: &CheckBlock, k: &mut Constants, name: &str) -> Result<f64> {
    match c.constant {
        Some(v) => Ok(v),
        None => k.get(name),
    }
}

fn live_times(traj: &Trajectory) -> Vec<f64> {
    let t_ext = traj.extinction.unwrap_or(f64::INFINITY);
    traj.times().into_iter().filter(|&t| t > traj.initial().t && t < t_ext).collect()
}

fn minimal_life(traj: &Trajectory, radius: f64, k: &mut Constants) -> Result<f64> {
    let ks = k.get("kappa_star")?;
    let field = CellField::new(&traj.grid, traj.initial());
    minimal_life_time(&traj.params, &field, &Ball::centered(radius), ks)
}

/// Runs one configured check on a solved problem.
pub fn run_check(c: &CheckBlock, solved: &Solved, exact: Option<&Exact>, k: &mut Constants) -> Result<Vec<CheckReport>> {
    let traj = &solved.main;
    let params = traj.params;
    let radius = c.radius();
    let ball = Ball::centered(radius);
    let name = c.name.as_str();
    let last = || live_times(traj).last().copied();
    Ok(match name {
        "smoothing" => {
            let t = need(c.t.or_else(last), name, "t")?;
            vec![check_smoothing(traj, &ball, c.p.unwrap_or(params.p), t, constant(c, k, "kappa1")?)?]
        }
        "herrero-pierre" => {
            let (t, tau) = (need(c.t, name, "t")?, need(c.tau, name, "tau")?);
            vec![check_herrero_pierre(traj, &ball, t, tau, constant(c, k, "kappa10_prime")?)?]
        }
        "lp-stability" => {
            let (t, tau) = (need(c.t, name, "t")?, need(c.tau, name, "tau")?);
            let r1 = c.r1.unwrap_or(radius);
            let r0 = c.r0.unwrap_or(2.0 * r1);
            vec![check_lp_stability(traj, 0.0, r1, r0, c.p.unwrap_or(2.0), t, tau, constant(c, k, "c_p")?)?]
        }
        "lower-bound" => {
            let times = if c.times.is_empty() {
                let ts = minimal_life(traj, radius, k)?;
                live_times(traj).into_iter().filter(|&t| t <= ts).collect()
            } else {
                c.times.clone()
            };
            vec![check_lower_bound(traj, radius, traj.initial().t, &times, constant(c, k, "kappa_lower")?)?]
        }
        "extinction" => {
            let q = c.q.unwrap_or_else(|| extinction_order(&params));
            let k13 = match c.constant {
                Some(v) => v,
                None if q == k.get("extinction_q")? => k.get("kappa13")?,
                None => kappa13(&params, q, 400)?.value,
            };
            check_extinction_bounds(traj, radius, q, k13, k.get("kappa_star")?)?
        }
        "extinction-time" => {
            let t_ext = match exact {
                Some(Exact::Separable(s)) => s.t_ext,
                _ => return Err(Error::Config("extinction-time needs a separable [problem.exact]".into())),
            };
            vec![check_extinction_time(traj, t_ext, c.rel_tol.unwrap_or(0.02))?]
        }
        "harnack" => {
            let eps = c.eps.unwrap_or(0.1);
            let t_star = match c.t_star {
                Some(v) => v,
                None => minimal_life(traj, 2.0 * radius, k)?,
            };
            harnack_triptych(traj, radius, traj.initial().t, t_star, eps, constant(c, k, "kappa3")?)?
        }
        "energy-upper" | "energy-intermediate" | "energy-lower" => {
            let (t0, t_end) = (need(c.tau, name, "tau")?, need(c.t, name, "t")?);
            let r1 = c.r1.unwrap_or(radius);
            let w = EnergyWindow { r1, r: c.r0.unwrap_or(2.0 * r1), t0, t1: c.t1.unwrap_or(0.5 * (t0 + t_end)), t_end };
            match name {
                "energy-upper" => vec![check_energy_upper(traj, &w, c.p.unwrap_or(2.0), constant(c, k, "c1")?)?],
                "energy-intermediate" => {
                    vec![check_energy_intermediate(traj, &w, c.p.unwrap_or(0.5 * (1.0 - params.m)), constant(c, k, "c2")?)?]
                }
                _ => vec![check_energy_lower(traj, &w, c.p.unwrap_or(1.0), constant(c, k, "c3")?)?],
            }
        }
        "caccioppoli" => {
            let (tau, t) = (need(c.tau, name, "tau")?, need(c.t, name, "t")?);
            let r1 = c.r1.unwrap_or(radius);
            vec![check_caccioppoli(traj, r1, c.r0.unwrap_or(2.0 * r1), tau, t, constant(c, k, "c_caccioppoli")?)?]
        }
        "bmo-window" => {
            let t = need(c.t.or_else(last), name, "t")?;
            let target = solved.members.last().map(|(_, t)| t).unwrap_or(traj);
            check_bmo_window(target, &ball, t, constant(c, k, "c_bmo")?, k.get("kappa6")?, k.get("kappa7")?)?
        }
        other => return Err(Error::Config(format!("unknown check `{other}`"))),
    })
}

/// Reports of every configured check and whether each matched its expectation.
pub fn evaluate_checks(cfg: &RunConfig, solved: &Solved, k: &mut Constants) -> Result<Vec<(CheckReport, bool)>> {
    let exact = cfg.exact()?;
    let mut out = Vec::new();
    for c in &cfg.checks {
        for r in run_check(c, solved, exact.as_ref(), k)? {
            let ok = r.pass == (c.expect == Expect::Pass);
            out.push((r, ok));
        }
    }
    Ok(out)
}

pub fn cmd_check(cfg: &RunConfig, only: &[String], g: &Globals) -> i32 {
    if let Some(bad) = only.iter().find(|n| !super::config::CHECK_NAMES.contains(&n.as_str())) {
        return fail(Error::Config(format!("unknown check `{bad}`")));
    }
    let mut cfg = cfg.clone();
    if !only.is_empty() {
        cfg.checks.retain(|c| only.contains(&c.name));
    }
    let dir = cfg.out_dir(g.out.as_deref());
    if let Err(e) = std::fs::create_dir_all(&dir) {
        return fail(e.into());
    }
    let mut files = Vec::new();
    if cfg.checks.is_empty() {
        return match write_reports(&dir, "reports", &[], Some(&cfg), &mut files).and_then(|_| write_manifest(&dir, "check", Some(&cfg), g, &files)) {
            Ok(()) => EXIT_OK,
            Err(e) => fail(e),
        };
    }
    let solved = match solve(&cfg) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let mut k = match Constants::new(&cfg) {
        Ok(k) => k,
        Err(e) => return fail(e),
    };
    let results = match evaluate_checks(&cfg, &solved, &mut k) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let reports: Vec<CheckReport> = results.iter().map(|(r, _)| r.clone()).collect();
    let res = (|| -> Result<()> {
        write_reports(&dir, "reports", &reports, Some(&cfg), &mut files)?;
        if let Some(l) = k.ledger() {
            io(std::fs::write(dir.join("constants.json"), l.to_json()?))?;
            files.push("constants.json".into());
        }
        write_manifest(&dir, "check", Some(&cfg), g, &files)
    })();
    if let Err(e) = res {
        return fail(e);
    }
    for (r, ok) in &results {
        println!("{:<24} {} lhs={:.6e} rhs={:.6e} measured={:.6e}", r.name, if *ok { "ok" } else { "UNEXPECTED" }, r.lhs, r.rhs, r.measured_constant);
    }
    if results.iter().all(|(_, ok)| *ok) {
        EXIT_OK
    } else {
        EXIT_CHECK
    }
}

fn scale_datum(d: &DatumSpec, f: f64) -> DatumSpec {
    match d.clone() {
        DatumSpec::Bump { radius, power, amplitude } => DatumSpec::Bump { radius, power, amplitude: amplitude * f },
        DatumSpec::Characteristic { radius, value } => DatumSpec::Characteristic { radius, value: value * f },
        DatumSpec::CustomTable { r, u } => DatumSpec::CustomTable { r, u: u.into_iter().map(|x| x * f).collect() },
        other => other,
    }
}

/// The configuration at one sweep point.
pub fn sweep_point(cfg: &RunConfig, axis: Axis, v: f64) -> Result<RunConfig> {
    let mut c = cfg.clone();
    match axis {
        Axis::M => c.params.m = v,
        Axis::P => c.params.p = v,
        Axis::Gamma => c.params.gamma = v,
        Axis::Beta => c.params.beta = v,
        Axis::Radius => {
            c.ledger.radius = v;
            for ch in &mut c.checks {
                ch.radius = Some(v);
            }
        }
        Axis::Eps => {
            for ch in &mut c.checks {
                ch.eps = Some(v);
            }
        }
        Axis::Delta => c.problem.delta = Some(v),
        Axis::DatumMass => {
            let d = c.problem.datum.as_ref().ok_or_else(|| Error::Config("datum-mass sweep needs [problem.datum]".into()))?;
            c.problem.datum = Some(scale_datum(d, v));
        }
    }
    c.sweep = None;
    c.validate()?;
    Ok(c)
}

fn sweep_row(cfg: &RunConfig, solve_point: bool) -> Result<BTreeMap<String, f64>> {
    let params = cfg.params()?;
    let e = exponents(&params);
    let mut row = BTreeMap::new();
    row.insert("sigma".to_string(), e.sigma);
    row.insert("m_c".to_string(), e.m_c);
    row.insert("p_c".to_string(), e.p_c);
    row.insert("theta_p".to_string(), e.theta_p);
    let r = cfg.ledger.radius;
    if let Some(d) = &cfg.problem.datum {
        let grid = cfg.grid()?;
        let snap = d.sample(&params, &grid)?;
        let field = CellField::new(&grid, &snap);
        let ball = Ball::centered(r);
        if ball.radius <= grid.r_max() {
            let hp = compute_hp(&params, &field, &ball, params.p.max(1.0))?;
            row.insert("hp".to_string(), hp.hp);
            row.insert("hp_tilde".to_string(), hp.hp_tilde);
        }
    }
    if solve_point {
        let solved = solve(cfg)?;
        let mut k = Constants::new(cfg)?;
        for (rep, _) in evaluate_checks(cfg, &solved, &mut k)? {
            row.insert(format!("{}:measured", rep.name), rep.measured_constant);
        }
        if let Some(t) = solved.main.extinction {
            row.insert("extinction".to_string(), t);
        }
    }
    Ok(row)
}

pub fn cmd_sweep(cfg: &RunConfig, g: &Globals) -> i32 {
    let sweep = match &cfg.sweep {
        Some(s) => s.clone(),
        None => return fail(Error::Config("sweep needs a [sweep] block".into())),
    };
    let dir = cfg.out_dir(g.out.as_deref());
    if let Err(e) = std::fs::create_dir_all(&dir) {
        return fail(e.into());
    }
    let rows: Vec<std::result::Result<BTreeMap<String, f64>, String>> = sweep
        .values
        .par_iter()
        .map(|&v| sweep_point(cfg, sweep.axis, v).and_then(|c| sweep_row(&c, sweep.solve)).map_err(|e| e.to_string()))
        .collect();
    let cols: BTreeSet<String> = rows.iter().flatten().flat_map(|r| r.keys().cloned()).collect();
    let mut files = Vec::new();
    let res = (|| -> Result<()> {
        let name = "sweep.csv";
        let mut w = csv::Writer::from_path(dir.join(name))?;
        let mut header = vec!["axis".to_string(), "value".to_string(), "status".to_string()];
        header.extend(cols.iter().cloned());
        w.write_record(&header)?;
        for (v, row) in sweep.values.iter().zip(&rows) {
            let axis = serde_json::to_value(sweep.axis)?.as_str().unwrap_or_default().to_string();
            let mut rec = vec![axis, v.to_string()];
            match row {
                Ok(r) => {
                    rec.push("ok".into());
                    rec.extend(cols.iter().map(|c| r.get(c).map(|x| x.to_string()).unwrap_or_default()));
                }
                Err(e) => {
                    eprintln!("warning: sweep point {v}: {e}");
                    rec.push(format!("failed: {e}"));
                    rec.extend(cols.iter().map(|_| String::new()));
                }
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        files.push(name.to_string());
        write_manifest(&dir, "sweep", Some(cfg), g, &files)
    })();
    if let Err(e) = res {
        return fail(e);
    }
    if g.strict && rows.iter().any(|r| r.is_err()) {
        EXIT_SOLVER
    } else {
        EXIT_OK
    }
}

pub fn cmd_constants(cfg: &RunConfig, g: &Globals) -> i32 {
    let dir = cfg.out_dir(g.out.as_deref());
    if let Err(e) = std::fs::create_dir_all(&dir) {
        return fail(e.into());
    }
    let params = match cfg.params() {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let ledger = match measure_ledger(&params, &cfg.ledger.options()) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {e}");
            return if exit_code(&e) == EXIT_IO { EXIT_IO } else { EXIT_SOLVER };
        }
    };
    let res = (|| -> Result<()> {
        io(std::fs::write(dir.join("constants.json"), ledger.to_json()?))?;
        io(std::fs::write(dir.join("probes.txt"), crate::inequalities::probe_manifest(&params)))?;
        write_manifest(&dir, "constants", Some(cfg), g, &["constants.json".into(), "probes.txt".into()])
    })();
    if let Err(e) = res {
        return fail(e);
    }
    let bad = ledger.invalid_entries();
    if g.strict && !bad.is_empty() {
        eprintln!("non-positive constants: {}", bad.join(", "));
        return EXIT_CHECK;
    }
    EXIT_OK
}

fn ge_report(name: &str, measured: f64, target: f64, ctx: Context) -> CheckReport {
    CheckReport {
        name: name.into(),
        lhs: target,
        rhs: measured,
        constant: target,
        measured_constant: measured,
        pass: measured >= target,
        tolerance: 0.0,
        context: ctx,
    }
}

/// Exact-solution oracle suite: PDE residuals, difference order, mass conservation,
/// Hölder exponent at the origin and solver extinction against the separable solution.
pub fn verify_exact(separable_params: &Params, barenblatt_params: &Params, seed: u64) -> Result<Vec<CheckReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let sep = Exact::Separable(separable(separable_params, 1.0)?);
    let (mut worst, mut order) = (0.0f64, f64::INFINITY);
    for _ in 0..20 {
        let r: f64 = rng.gen_range(0.25..1.0);
        let t: f64 = rng.gen_range(0.1..0.9);
        worst = worst.max(relative_residual(&sep, t, r, 0.1, 4)?);
        let (a, b) = (fd_residual(&sep, t, r, 2e-2)?.abs(), fd_residual(&sep, t, r, 1e-2)?.abs());
        if a > 0.0 && b > 0.0 {
            order = order.min((a / b).log2());
        }
    }
    out.push(CheckReport::scaled("separable_residual", worst, 1.0, 1e-10, Context::new(separable_params).value("seed", seed as f64)));
    out.push(ge_report("separable_difference_order", order, 1.9, Context::new(separable_params)));

    let bar = barenblatt(barenblatt_params, BarenblattChoice::D(1.0))?;
    let be = Exact::Barenblatt(bar);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let r: f64 = rng.gen_range(0.1..2.0);
        let t: f64 = rng.gen_range(0.5..2.0);
        worst = worst.max(relative_residual(&be, t, r, 0.1, 3)?);
    }
    out.push(CheckReport::scaled("barenblatt_residual", worst, 1.0, 1e-8, Context::new(barenblatt_params)));
    let m0 = bar.mass_at(1.0)?;
    let drift = [0.1, 0.3, 3.0, 10.0].iter().map(|&t| bar.mass_at(t).map(|m| (m / m0 - 1.0).abs())).collect::<Result<Vec<_>>>()?;
    let drift = drift.into_iter().fold(0.0, f64::max);
    out.push(CheckReport::scaled("barenblatt_mass", drift, 1.0, 1e-8, Context::new(barenblatt_params).value("mass", m0)));
    let fit = holder_exponent(&ExactField::new(be), 1.0, 0.0, bar.value(1.0, 0.0)?, 1e-3, 8)?;
    let expected = barenblatt_params.sigma().min(1.0);
    let measured = fit.exponent.unwrap_or(f64::NAN);
    let mut rep = CheckReport::scaled("barenblatt_holder_origin", (measured - expected).abs(), 1.0, 0.05, Context::new(barenblatt_params));
    rep.measured_constant = measured;
    out.push(rep);

    let grid = build_grid(separable_params, 0.25, 1.0, 128, Grading::Uniform)?;
    let initial = crate::exact::sample(&sep, &grid, 0.0)?;
    let time = TimeControl { t_end: 1.5, dt: DtPolicy::Adaptive { dt0: 1e-5, dt_max: 1e-2 }, output_times: vec![0.5], record_every: 0 };
    let spec = ProblemSpec::new(*separable_params, grid, Boundary::ExactTrace(sep), initial, time)?;
    let traj = run(&spec)?;
    out.push(check_extinction_time(&traj, 1.0, 0.02)?);
    Ok(out)
}

pub fn cmd_verify_exact(cfg: Option<&RunConfig>, g: &Globals) -> i32 {
    let (sp, bp) = match cfg.map(|c| c.params()).transpose() {
        Ok(Some(p)) if p.m < p.m_c() => (Ok(p), Params::new(p.n, p.gamma, p.beta, 0.5 * (p.m_c() + 1.0), p.p.max(1.0))),
        Ok(Some(p)) if p.m > p.m_c() && p.m < 1.0 => (Params::new(3, 1.0, 0.0, 0.25, 2.0), Ok(p)),
        Ok(_) => (Params::new(3, 1.0, 0.0, 0.25, 2.0), Params::new(3, 1.0, 0.0, 0.6, 2.0)),
        Err(e) => return fail(e),
    };
    let (sp, bp) = match (sp, bp) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return fail(e),
    };
    let dir = match cfg {
        Some(c) => c.out_dir(g.out.as_deref()),
        None => g.out.clone().unwrap_or_else(|| "out".into()),
    };
    if let Err(e) = std::fs::create_dir_all(&dir) {
        return fail(e.into());
    }
    let reports = match verify_exact(&sp, &bp, g.seed) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let mut files = Vec::new();
    if let Err(e) = write_reports(&dir, "verify_exact", &reports, cfg, &mut files).and_then(|_| write_manifest(&dir, "verify-exact", cfg, g, &files)) {
        return fail(e);
    }
    for r in &reports {
        println!("{:<28} {} measured={:.6e}", r.name, if r.pass { "pass" } else { "FAIL" }, r.measured_constant);
    }
    if reports.iter().all(|r| r.pass) {
        EXIT_OK
    } else {
        EXIT_CHECK
    }
}

