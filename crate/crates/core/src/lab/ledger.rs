//! The ledger of measured constants, each with the probe family or run that produced it.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datum::DatumSpec;
use crate::error::{Error, Result};
use crate::field::{CellField, FnField, RadialField};
use crate::geometry::{
    doubling_ratio, inclusion_factor, ratio_k16, ratio_k17, ratio_k18, ratio_k19, rho, scenario_balls, two_sided, Ball,
    Scenario,
};
use crate::grid::{build_grid, Grading};
use crate::inequalities::{
    ball_probes, ckn_on_ball, ckn_ratio, john_nirenberg_kappa6, kappa10_prime_raw, kappa10_test_function, kappa13,
    poincare_on_ball, probe_manifest_hash, whole_space_probes, PROBE_FAMILY_VERSION,
};
use crate::params::Params;
use crate::solver::{run, run_delta_continuation, Boundary, DtPolicy, ProblemSpec, TimeControl, Trajectory};

use super::checks::{check_herrero_pierre, check_lower_bound, check_lp_stability};
use super::energy::{check_caccioppoli, check_energy_intermediate, check_energy_lower, check_energy_upper, EnergyWindow};
use super::harnack::{check_bmo_window, harnack_triptych, linear_harnack, triptych_times};
use super::hp::{compute_hp, kappa_star, minimal_life_time};
use super::smoothing::{calibrate_smoothing, smoothing_terms, SMOOTHING_EPSILONS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub value: f64,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantLedger {
    pub params: Params,
    pub radius: f64,
    pub probe_version: String,
    pub probe_manifest_sha256: String,
    pub entries: BTreeMap<String, LedgerEntry>,
}

impl ConstantLedger {
    pub fn new(params: &Params, radius: f64) -> Self {
        ConstantLedger {
            params: *params,
            radius,
            probe_version: PROBE_FAMILY_VERSION.to_string(),
            probe_manifest_sha256: probe_manifest_hash(params),
            entries: BTreeMap::new(),
        }
    }

    /// Last writer wins.
    pub fn insert(&mut self, name: &str, value: f64, provenance: &str) {
        self.entries.insert(name.to_string(), LedgerEntry { value, provenance: provenance.to_string() });
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        self.entries
            .get(name)
            .map(|e| e.value)
            .ok_or_else(|| Error::Config(format!("constant `{name}` is not in the ledger")))
    }

    pub fn get_or(&self, name: &str, default: f64) -> f64 {
        self.entries.get(name).map(|e| e.value).unwrap_or(default)
    }

    /// Entries that are not positive and finite.
    pub fn invalid_entries(&self) -> Vec<String> {
        self.entries.iter().filter(|(_, e)| !(e.value > 0.0 && e.value.is_finite())).map(|(k, _)| k.clone()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerOptions {
    /// Radius of the reference ball `B_R(0)`.
    pub radius: f64,
    /// Also run the solver-based calibration (smoothing, lower bound, Harnack, energy).
    pub calibrate: bool,
    /// Cells per reference radius in calibration runs.
    pub cells_per_radius: usize,
}

impl Default for LedgerOptions {
    fn default() -> Self {
        LedgerOptions { radius: 1.0, calibrate: false, cells_per_radius: 64 }
    }
}

fn sample_balls(radius: f64) -> Vec<Ball> {
    let mut balls = scenario_balls(Scenario::S1, radius, 1);
    balls.extend(scenario_balls(Scenario::S2, radius, 3));
    balls.extend(scenario_balls(Scenario::S3, radius, 3));
    balls
}

/// `κ₁₆–κ₁₉`, the doubling constant `D_γ` and the inclusion factor `A`, over scenario balls
/// with radii `R·{10⁻¹, 1, 10}`.
pub fn measure_geometry(ledger: &mut ConstantLedger) -> Result<()> {
    let p = ledger.params;
    let r = ledger.radius;
    let balls: Vec<Ball> = [0.1, 1.0, 10.0].iter().flat_map(|&k| sample_balls(k * r)).collect();
    let mut k16 = Vec::new();
    let mut k17 = Vec::new();
    let mut k18 = Vec::new();
    let mut k19 = Vec::new();
    let mut dg = 1.0f64;
    for b in &balls {
        k16.push(ratio_k16(&p, b)?);
        k17.push(ratio_k17(&p, b)?);
        k18.push(ratio_k18(&p, b)?);
        k19.push(ratio_k19(&p, b.center_norm, rho(&p, b)?)?);
        dg = dg.max(doubling_ratio(&p, b)?);
    }
    let prov = "scenario balls (1)(2)(3), radii R·{0.1,1,10}";
    ledger.insert("kappa16", two_sided(&k16), prov);
    ledger.insert("kappa17", two_sided(&k17), prov);
    ledger.insert("kappa18", two_sided(&k18), prov);
    ledger.insert("kappa19", two_sided(&k19), prov);
    ledger.insert("doubling", dg, prov);
    ledger.insert("inclusion", inclusion_factor(&p, &Ball::centered(r))?, "B_R(0)");
    Ok(())
}

/// CKN, Poincaré, John–Nirenberg, the cut-off constants `κ₁₀`, `κ′₁₀`, `κ*` and `κ₁₃`.
pub fn measure_functional(ledger: &mut ConstantLedger) -> Result<()> {
    let p = ledger.params;
    let r = ledger.radius;
    let mut sbar = 0.0f64;
    for f in whole_space_probes(&p) {
        sbar = sbar.max(ckn_ratio(&p, &f)?);
    }
    let balls = sample_balls(r);
    let probes = ball_probes(&p, r);
    let (s, pc) = balls
        .par_iter()
        .map(|b| -> Result<(f64, f64)> {
            let (mut s, mut pc) = (0.0f64, 0.0f64);
            for f in &probes {
                s = s.max(ckn_on_ball(&p, f, b, 1.0)?.measured_constant);
                pc = pc.max(poincare_on_ball(&p, f, b, 1.0)?.measured_constant);
            }
            Ok((s, pc))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold((0.0f64, 0.0f64), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    let fam = format!("{PROBE_FAMILY_VERSION} on scenario balls of radius R");
    ledger.insert("sobolev_whole_space", sbar, &format!("{PROBE_FAMILY_VERSION} whole-space family"));
    ledger.insert("sobolev_ball", s, &fam);
    ledger.insert("poincare", pc, &fam);

    let kappa5 = 2.0;
    ledger.insert("kappa5", kappa5, "fixed level of the exponential average");
    let ball = Ball::centered(r);
    let sigma = p.sigma();
    let fields: Vec<Box<dyn RadialField>> = vec![
        Box::new(FnField(|x: f64| x.ln())),
        Box::new(FnField(move |x: f64| -(1.0 + (x / r).powf(sigma)).ln() / (1.0 - p.m))),
    ];
    let mut k6 = 0.0f64;
    for f in &fields {
        k6 = k6.max(john_nirenberg_kappa6(&p, f.as_ref(), &ball, 5, kappa5)?);
    }
    ledger.insert("kappa6", k6, "log r and log Barenblatt profile on B_R(0), dyadic depth 5");
    ledger.insert("kappa7", kappa5, "equal to kappa5");

    let b = 2.0 / (1.0 - p.m);
    let mut k10 = 0.0f64;
    let mut k10p = 0.0f64;
    for ball in &balls {
        k10 = k10.max(kappa10_test_function(&p, ball, b)?);
        k10p = k10p.max(kappa10_prime_raw(&p, ball, b)?);
    }
    ledger.insert("kappa10", k10, "smoothstep cut-off, b = 2/(1-m), scenario balls");
    ledger.insert("kappa10_prime_raw", k10p, "cut-off integral, scenario balls");
    let k10p = k10p.max(1.0);
    ledger.insert("kappa10_prime", k10p, "max(1, kappa10_prime_raw)");
    ledger.insert("kappa_star", kappa_star(&p, k10p), "2^m / (5 kappa10_prime)");

    let q = extinction_order(&p);
    let k13 = kappa13(&p, q, 400)?;
    ledger.insert("kappa13", k13.value, &format!("inverse iteration on B_1(0), 400 cells, q = {q}"));
    ledger.insert("extinction_q", q, "integrability order of the extinction bound");
    Ok(())
}

/// `q = p` when admissible for the extinction bound, else `max(2, 2p_c)`.
pub fn extinction_order(p: &Params) -> f64 {
    if p.p > 1.0 && p.p > p.p_c() {
        p.p
    } else {
        (2.0 * p.p_c()).max(2.0)
    }
}

/// Linear Harnack constant `κ_ℓ`, the quotient `H` and the Hölder exponent `α`.
pub fn measure_linear(ledger: &mut ConstantLedger) -> Result<()> {
    let p = ledger.params;
    let l = linear_harnack(&p, ledger.radius)?;
    let prov = "source kernel of the linear equation, shifts rho·[1e-3, 1e2]";
    ledger.insert("kappa_linear", l.kappa_l, prov);
    ledger.insert("alpha", l.alpha, "log_A(H/(H-1)), H = kappa_linear^2");
    Ok(())
}

/// Reference Dirichlet run on `B_{R₀}(0)` with a bump datum on `B_R(0)`.
pub fn reference_run(params: &Params, radius: f64, r0_factor: f64, cells_per_radius: usize, bc_delta: Option<f64>, outputs: Vec<f64>, t_end: f64) -> Result<ProblemSpec> {
    let r0 = r0_factor * radius;
    let grid = build_grid(params, 0.0, r0, (r0_factor * cells_per_radius as f64) as usize, Grading::Uniform)?;
    let datum = DatumSpec::Bump { radius, power: 2.0, amplitude: 1.0 }.sample(params, &grid)?;
    let bc = match bc_delta {
        Some(delta) => Boundary::DeltaMdp { support: radius, delta },
        None => Boundary::Mdp { support: radius },
    };
    let dt0 = 1e-4 * t_end.min(radius.powf(params.sigma()));
    let time = TimeControl { t_end, dt: DtPolicy::Adaptive { dt0, dt_max: t_end / 200.0 }, output_times: outputs, record_every: 0 };
    ProblemSpec::new(*params, grid, bc, datum, time)
}

/// `δ` values of the continuation runs, relative to the datum amplitude.
pub const CALIBRATION_DELTAS: [f64; 3] = [4e-3, 2e-3, 1e-3];

/// Solver-based constants: smoothing `κ₁ = κ₂`, `κ₁₂`, `L^p` stability `c_p`, energy `c₁,c₂,c₃`,
/// lower-bound `κ`, Harnack `κ₃` and the `BMO` structure constant.
pub fn calibrate_solver(ledger: &mut ConstantLedger, cells_per_radius: usize) -> Result<()> {
    let p = ledger.params;
    let r = ledger.radius;
    let sigma = p.sigma();

    let sep = calibrate_smoothing(&p, &SMOOTHING_EPSILONS)?;

    // Extinguishing run on B_{4R}.
    let horizon = 1e3 * r.powf(sigma);
    let outs: Vec<f64> = (0..=60).map(|k| horizon * 10f64.powf(-9.0 + 9.0 * k as f64 / 60.0)).collect();
    let mut spec = reference_run(&p, r, 4.0, cells_per_radius, None, outs, horizon)?;
    spec.time.record_every = 0;
    let mdp = run(&spec)?;
    let ball = Ball::centered(r);
    let times: Vec<f64> = mdp.times().into_iter().filter(|&t| t > 0.0).collect();
    let mut smooth = sep.constant;
    let mut k12 = 0.0f64;
    let u0 = mdp.initial();
    let lp0 = CellField::new(&mdp.grid, u0).ball_integral(p.n, p.gamma, &Ball::centered(mdp.grid.r_max()), &|u| u.powf(p.p))?;
    for &t in &times {
        let s = smoothing_terms(&mdp, &ball, p.p, t)?;
        smooth = smooth.max(s.lhs / (s.data + s.worst));
        let sup = mdp.at(t).map(|x| x.sup()).unwrap_or(0.0);
        let k = sup * t.powf((p.nf() - p.gamma) * p.theta(p.p)) / lp0.powf(sigma * p.theta(p.p));
        k12 = k12.max(k);
    }
    ledger.insert("kappa1", smooth, "separable calibration (bounded probes) and MDP bump run on B_4R");
    ledger.insert("kappa2", smooth, "ray kappa1 = kappa2");
    ledger.insert("kappa12", k12, "MDP bump run on B_4R, all stored times");

    let mut cp = 0.0f64;
    let mut c1 = 0.0f64;
    let t_ext = mdp.extinction.unwrap_or(*times.last().unwrap_or(&horizon));
    let live: Vec<f64> = times.iter().copied().filter(|&t| t < t_ext).collect();
    for w in live.windows(7).step_by(6) {
        cp = cp.max(check_lp_stability(&mdp, 0.0, r, 2.0 * r, 2.0, w[6], w[0], 1.0)?.measured_constant);
    }
    if live.len() >= 9 {
        let k = live.len();
        let win = EnergyWindow { r1: r, r: 2.0 * r, t0: live[k / 3], t1: live[k / 2], t_end: live[k - 1] };
        c1 = check_energy_upper(&mdp, &win, 2.0, 1.0)?.measured_constant;
    }
    ledger.insert("c_p", cp, "MDP bump run, R1 = R, R0 = 2R, p = 2");
    ledger.insert("c1", c1, "MDP bump run, R1 = R, R = 2R, p = 2");

    // Lifted runs on B_{8R} up to the minimal life time of B_2R.
    let k10p = ledger.get("kappa10_prime")?;
    let ks = kappa_star(&p, k10p);
    let grid_probe = build_grid(&p, 0.0, 8.0 * r, 8 * cells_per_radius, Grading::Uniform)?;
    let datum = DatumSpec::Bump { radius: r, power: 2.0, amplitude: 1.0 }.sample(&p, &grid_probe)?;
    let field = CellField::new(&grid_probe, &datum);
    let t_star = minimal_life_time(&p, &field, &ball, ks)?;
    let t_star2 = minimal_life_time(&p, &field, &Ball::centered(2.0 * r), ks)?;
    let hp = compute_hp(&p, &field, &ball, p.p)?;
    let lower_times: Vec<f64> = (1..=10).map(|k| t_star * k as f64 / 10.0).collect();
    let trip = triptych_times(0.0, t_star2, 0.1);
    let mut outs = lower_times.clone();
    outs.extend(trip);
    let t_end = outs.iter().copied().fold(0.0, f64::max);
    let spec = reference_run(&p, r, 8.0, cells_per_radius, Some(CALIBRATION_DELTAS[0]), outs, t_end)?;
    let dc = run_delta_continuation(&spec, &CALIBRATION_DELTAS)?;
    let ext = &dc.extrapolated;
    let lower = check_lower_bound(ext, r, 0.0, &lower_times, 0.0)?;
    ledger.insert("kappa_lower", lower.measured_constant, "delta-extrapolated bump run on B_8R, 10 times in (0, t*]");
    let k3 = harnack_triptych(ext, r, 0.0, t_star2, 0.1, 1.0)?.iter().map(|x| x.measured_constant).fold(0.0, f64::max);
    ledger.insert("kappa3", k3, "delta-extrapolated bump run on B_8R, eps = 0.1");
    ledger.insert("hp_tilde_reference", hp.hp_tilde, "bump datum on B_R(0)");

    let lifted = &dc.runs[dc.runs.len() - 1];
    let tl = lifted.times();
    let k = tl.len();
    let (mut c2, mut c3, mut cc, mut cb) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    if k >= 6 {
        let win = EnergyWindow { r1: r, r: 2.0 * r, t0: tl[1], t1: tl[k / 2], t_end: tl[k - 1] };
        c2 = check_energy_intermediate(lifted, &win, 0.5 * (1.0 - p.m), 1.0)?.measured_constant;
        c3 = check_energy_lower(lifted, &win, 1.0, 1.0)?.measured_constant;
        cc = check_caccioppoli(lifted, r, 2.0 * r, tl[1], tl[k - 1], 1.0)?.measured_constant;
        for &t in &tl[1..] {
            cb = cb.max(check_bmo_window(lifted, &ball, t, 1.0, ledger.get_or("kappa6", 1.0), 2.0)?[0].measured_constant);
        }
    }
    ledger.insert("c2", c2, "lifted bump run (smallest delta), p = (1-m)/2");
    ledger.insert("c3", c3, "lifted bump run (smallest delta), p = 1");
    ledger.insert("c_caccioppoli", cc, "lifted bump run (smallest delta), R1 = R, R = 2R");
    ledger.insert("c_bmo", cb, "lifted bump run (smallest delta), all stored times");
    ledger.insert("herrero_pierre_check", herrero_pierre_max(&mdp, &ball, &live, k10p)?, "MDP bump run, measured over stored pairs");
    Ok(())
}

fn herrero_pierre_max(traj: &Trajectory, ball: &Ball, times: &[f64], k10p: f64) -> Result<f64> {
    let mut best = 0.0f64;
    for w in times.windows(5).step_by(4) {
        best = best.max(check_herrero_pierre(traj, ball, w[4], w[0], k10p)?.measured_constant);
        best = best.max(check_herrero_pierre(traj, ball, w[0], w[4], k10p)?.measured_constant);
    }
    Ok(best.max(f64::MIN_POSITIVE))
}

/// The full ledger.
pub fn measure_ledger(params: &Params, opts: &LedgerOptions) -> Result<ConstantLedger> {
    let mut l = ConstantLedger::new(params, opts.radius);
    measure_geometry(&mut l)?;
    measure_functional(&mut l)?;
    measure_linear(&mut l)?;
    if opts.calibrate {
        calibrate_solver(&mut l, opts.cells_per_radius)?;
    }
    Ok(l)
}
