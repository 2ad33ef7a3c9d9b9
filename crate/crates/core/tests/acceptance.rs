//! Acceptance criteria, one line each. Run with `cargo test --test acceptance`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

use wfde::datum::DatumSpec;
use wfde::exact::{barenblatt, fd_residual, relative_residual, sample, separable, BarenblattChoice, Exact};
use wfde::field::{CellField, FnField};
use wfde::geometry::{ratio_k16, ratio_k18, ratio_k19, rho, scenario_balls, two_sided, Ball, Scenario};
use wfde::grid::{build_grid, from_edges, Grading, Snapshot};
use wfde::inequalities::{ball_probes, ckn_ratio, poincare_on_ball, Profile, TestFunction};
use wfde::lab::*;
use wfde::params::Params;
use wfde::solver::{run, run_delta_continuation, Boundary, DtPolicy, ProblemSpec, TimeControl, Trajectory};
use wfde::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn p_sep() -> Params {
    Params::new(3, 1.0, 0.0, 0.25, 2.0).unwrap()
}

fn annulus_run(cells: usize, dt: DtPolicy, t_end: f64, outputs: Vec<f64>) -> Result<Trajectory> {
    let p = p_sep();
    let sol = Exact::Separable(separable(&p, 1.0)?);
    let grid = build_grid(&p, 0.25, 1.0, cells, Grading::Uniform)?;
    let initial = sample(&sol, &grid, 0.0)?;
    let time = TimeControl { t_end, dt, output_times: outputs, record_every: 0 };
    run(&ProblemSpec::new(p, grid, Boundary::ExactTrace(sol), initial, time)?)
}

fn c1_residual() -> Result<Outcome> {
    let sol = Exact::Separable(separable(&p_sep(), 1.0)?);
    let pts = [(0.1, 0.3), (0.3, 0.26), (0.5, 0.5), (0.7, 0.8), (0.9, 0.99)];
    let mut worst = 0.0f64;
    let mut order = f64::INFINITY;
    for &(t, r) in &pts {
        worst = worst.max(relative_residual(&sol, t, r, 0.1, 4)?);
        let e: Vec<f64> = [0.02, 0.01, 0.005].iter().map(|&h| fd_residual(&sol, t, r, h).map(f64::abs)).collect::<Result<_>>()?;
        order = order.min((e[0] / e[1]).log2()).min((e[1] / e[2]).log2());
    }
    outcome(worst < 1e-10 && order >= 2.0 - 0.02, format!("relative residual {worst:.2e}, difference order {order:.3}"))
}

fn c2_convergence() -> Result<Outcome> {
    let sol = Exact::Separable(separable(&p_sep(), 1.0)?);
    let mut errs = Vec::new();
    for cells in [64, 128, 256] {
        let h = 0.75 / cells as f64;
        let traj = annulus_run(cells, DtPolicy::Fixed(0.5 * h * h), 0.5, vec![0.5])?;
        let snap = traj.at(0.5).expect("stored");
        let err = traj.grid.centers.iter().zip(&snap.values).map(|(&r, &u)| (u - sol.value(0.5, r).unwrap()).abs()).fold(0.0, f64::max);
        errs.push(err);
    }
    let o1 = (errs[0] / errs[1]).log2();
    let o2 = (errs[1] / errs[2]).log2();
    outcome(o1.min(o2) >= 1.8, format!("L∞ errors {:.2e} {:.2e} {:.2e}, orders {o1:.3} {o2:.3}", errs[0], errs[1], errs[2]))
}

fn c3_extinction() -> Result<Outcome> {
    let p = p_sep();
    let traj = annulus_run(128, DtPolicy::Adaptive { dt0: 1e-5, dt_max: 1e-2 }, 1.5, vec![0.5])?;
    let t = traj.extinction.unwrap_or(f64::NAN);
    let rel = (t - 1.0).abs();

    let ledger = measure_ledger(&p, &LedgerOptions::default())?;
    let grid = build_grid(&p, 0.0, 4.0, 512, Grading::Uniform)?;
    let datum = DatumSpec::SeparableSlice { t_ext: 1.0, t: 0.0, r_min: 0.25, r_max: 1.0 }.sample(&p, &grid)?;
    let time = TimeControl { t_end: 50.0, dt: DtPolicy::Adaptive { dt0: 1e-6, dt_max: 0.05 }, output_times: vec![], record_every: 0 };
    let mdp = run(&ProblemSpec::new(p, grid, Boundary::Mdp { support: 1.0 }, datum, time)?)?;
    let q = ledger.get("extinction_q")?;
    let b = extinction_bracket(&mdp, 1.0, q, ledger.get("kappa13")?, ledger.get("kappa_star")?)?;
    let ok = rel <= 0.02 && b.t_star <= b.t_ext && b.t_ext <= b.upper;
    outcome(ok, format!("annulus T = {t:.6} (rel err {rel:.1e}); MDP t* = {:.3e} ≤ T = {:.4} ≤ {:.4}", b.t_star, b.t_ext, b.upper))
}

fn c4_counterexample() -> Result<Outcome> {
    let p = p_sep();
    let sol = Exact::Separable(separable(&p, 1.0)?);
    let constant = calibrate_smoothing(&p, &SMOOTHING_EPSILONS)?.constant;
    let grid = from_edges(&p, log_graded_edges(1e-16, 2.0, SMOOTHING_PER_DECADE)?)?;
    let traj = exact_trajectory(&sol, &grid, &[0.0, 0.5])?;
    let ball = Ball::centered(1.0);
    let pc = p.p_c();
    let mut ok = true;
    let mut parts = Vec::new();
    for (f, expect) in [(0.6, false), (0.8, false), (0.95, false), (1.05, true), (1.5, true), (2.0, true)] {
        let r = check_smoothing(&traj, &ball, f * pc, 0.5, constant)?;
        ok &= r.pass == expect;
        parts.push(format!("{f}p_c:{}", if r.pass { "pass" } else { "fail" }));
    }
    outcome(ok, format!("constant {constant:.4}; {}", parts.join(" ")))
}

fn zero_flux_mass_drift() -> Result<f64> {
    let p = p_sep();
    let grid = build_grid(&p, 0.0, 2.0, 128, Grading::Uniform)?;
    let datum = DatumSpec::Bump { radius: 1.0, power: 2.0, amplitude: 1.0 }.sample(&p, &grid)?;
    let m0 = datum.mass(&grid);
    let time = TimeControl { t_end: 1.0, dt: DtPolicy::Fixed(1e-3), output_times: vec![1.0], record_every: 100 };
    let traj = run(&ProblemSpec::new(p, grid, Boundary::ZeroFlux, datum, time)?)?;
    assert_eq!(traj.steps.len(), 1000);
    Ok(traj.snapshots.iter().map(|s| (s.mass(&traj.grid) / m0 - 1.0).abs()).fold(0.0, f64::max))
}

fn c5_conservation_comparison() -> Result<Outcome> {
    let drift = zero_flux_mass_drift()?;
    let p = p_sep();
    let grid = build_grid(&p, 0.0, 4.0, 64, Grading::Uniform)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut slack = f64::NEG_INFINITY;
    let knots: Vec<f64> = (0..=8).map(|k| k as f64 / 8.0).collect();
    let outs = vec![0.01, 0.05, 0.1, 0.2];
    let time = TimeControl { t_end: 0.2, dt: DtPolicy::Fixed(2e-3), output_times: outs.clone(), record_every: 0 };
    for _ in 0..50 {
        let mut lo: Vec<f64> = knots.iter().map(|_| rng.gen_range(0.0..1.0)).collect();
        let mut hi: Vec<f64> = lo.iter().map(|&v| v + rng.gen_range(0.0..0.5)).collect();
        lo[8] = 0.0;
        hi[8] = 0.0;
        let solve = |u: Vec<f64>| -> Result<Trajectory> {
            let d = DatumSpec::CustomTable { r: knots.clone(), u }.sample(&p, &grid)?;
            run(&ProblemSpec::new(p, grid.clone(), Boundary::Mdp { support: 1.0 }, d, time.clone())?)
        };
        let (a, b) = (solve(lo)?, solve(hi)?);
        for &t in &outs {
            let (sa, sb) = (a.at(t).expect("stored"), b.at(t).expect("stored"));
            slack = sa.values.iter().zip(&sb.values).map(|(x, y)| x - y).fold(slack, f64::max);
        }
    }
    outcome(drift <= 1e-12 && slack <= 1e-9, format!("mass drift {drift:.2e} over 1000 steps; max(u − w) = {slack:.2e} over 50 pairs"))
}

fn positivity_run(p: &Params, datum: &DatumSpec, kstar: f64, extra: &[f64]) -> Result<(Trajectory, f64, Vec<f64>)> {
    let grid = build_grid(p, 0.0, 8.0, 256, Grading::Uniform)?;
    let u0 = datum.sample(p, &grid)?;
    let t_star = minimal_life_time(p, &CellField::new(&grid, &u0), &Ball::centered(2.0), kstar)?;
    let times: Vec<f64> = (1..=10).map(|k| t_star * k as f64 / 10.0).collect();
    let mut outs = times.clone();
    outs.extend(extra.iter().map(|f| f * t_star));
    outs.sort_by(f64::total_cmp);
    let time = TimeControl { t_end: t_star, dt: DtPolicy::Adaptive { dt0: 1e-4 * t_star, dt_max: t_star / 50.0 }, output_times: outs, record_every: 0 };
    let spec = ProblemSpec::new(*p, grid, Boundary::DeltaMdp { support: 1.0, delta: CALIBRATION_DELTAS[0] }, u0, time)?;
    let dc = run_delta_continuation(&spec, &CALIBRATION_DELTAS)?;
    Ok((dc.extrapolated, t_star, times))
}

fn c6_positivity() -> Result<Outcome> {
    let p = p_sep();
    let kstar = measure_ledger(&p, &LedgerOptions::default())?.get("kappa_star")?;
    let bump = DatumSpec::Bump { radius: 1.0, power: 2.0, amplitude: 1.0 };
    let mut kappas = Vec::new();
    let mut min_inf = f64::INFINITY;
    for _ in 0..2 {
        let (traj, _, times) = positivity_run(&p, &bump, kstar, &[])?;
        for &t in &times {
            min_inf = min_inf.min(traj.sup_inf(t, 2.0)?.1);
        }
        kappas.push(check_lower_bound(&traj, 1.0, 0.0, &times, 0.0)?.measured_constant);
    }
    let rep = (kappas[0] - kappas[1]).abs() / kappas[0];
    let ok = min_inf > 0.0 && kappas[0].is_finite() && kappas[0] > 0.0 && rep <= 1e-4;
    outcome(ok, format!("min inf over B_2R = {min_inf:.3e}; κ = {:.6e}, rerun deviation {rep:.1e}", kappas[0]))
}

fn c7_harnack() -> Result<Outcome> {
    let p = p_sep();
    let kstar = measure_ledger(&p, &LedgerOptions::default())?.get("kappa_star")?;
    let data = [
        DatumSpec::Bump { radius: 1.0, power: 2.0, amplitude: 1.0 },
        DatumSpec::Bump { radius: 1.0, power: 4.0, amplitude: 3.0 },
        DatumSpec::Bump { radius: 0.5, power: 1.0, amplitude: 1.0 },
        DatumSpec::Characteristic { radius: 0.75, value: 2.0 },
        DatumSpec::CustomTable { r: vec![0.0, 0.3, 0.6, 1.0], u: vec![0.2, 1.0, 0.5, 0.0] },
    ];
    let eps = 0.1;
    let mut worst = 0.0f64;
    let mut finite = true;
    for d in &data {
        let extra: Vec<f64> = triptych_times(0.0, 1.0, eps).to_vec();
        let (traj, t_star, _) = positivity_run(&p, d, kstar, &extra)?;
        for r in harnack_triptych(&traj, 1.0, 0.0, t_star, eps, f64::INFINITY)? {
            finite &= r.measured_constant.is_finite();
            worst = worst.max(r.measured_constant);
        }
    }
    let grid = build_grid(&p, 0.0, 2.0, 64, Grading::Uniform)?;
    let c = Snapshot { t: 0.0, values: vec![0.7; grid.len()] };
    let time = TimeControl { t_end: 1.0, dt: DtPolicy::Fixed(0.05), output_times: vec![0.5, 1.0], record_every: 0 };
    let flat = run(&ProblemSpec::new(p, grid, Boundary::ZeroFlux, c, time)?)?;
    let q = harnack_quotient(&flat, 1.0, 0.5, 0.0, 1.0)?.measured_constant;
    outcome(finite && (q - 1.0).abs() <= 1e-12, format!("largest quotient over 5 data {worst:.3e}; constant solution {q}"))
}

fn c8_holder() -> Result<Outcome> {
    let p = Params::new(3, 1.0, 0.0, 0.6, 2.0)?;
    let b = barenblatt(&p, BarenblattChoice::D(1.0))?;
    let fit = holder_exponent(&ExactField::new(Exact::Barenblatt(b)), 1.0, 0.0, b.value(1.0, 0.0)?, 1e-3, 8)?;
    let e = fit.exponent.unwrap_or(f64::NAN);
    outcome((e - 1.0).abs() <= 0.05, format!("exponent {e:.4} (σ = {})", p.sigma()))
}

fn c9_functional() -> Result<Outcome> {
    let p0 = Params::new(3, 0.0, 0.0, 0.5, 1.0)?;
    let n = 3.0f64;
    let sharp = (1.0 / (std::f64::consts::PI * n * (n - 2.0))).sqrt() * (gamma(n) / gamma(n / 2.0)).powf(1.0 / n);
    let at = TestFunction::new(Profile::AubinTalenti { scale: 1.0, exponent: (n - 2.0) / 2.0 });
    let ratio = ckn_ratio(&p0, &at)?;
    let dev = (ratio / sharp - 1.0).abs();

    let p = p_sep();
    let poincare = |radius: f64| -> Result<f64> {
        let ball = Ball::centered(radius);
        let mut best = 0.0f64;
        for f in ball_probes(&p, radius) {
            best = best.max(poincare_on_ball(&p, &f, &ball, 1.0)?.measured_constant);
        }
        Ok(best)
    };
    let base = poincare(1.0)?;
    let mut scale_dev = 0.0f64;
    for r in [0.1, 0.5, 2.0, 10.0] {
        scale_dev = scale_dev.max((poincare(r)? / base - 1.0).abs());
    }

    let ledger = measure_ledger(&p, &LedgerOptions::default())?;
    let (k6, k7) = (ledger.get("kappa6")?, ledger.get("kappa7")?);
    let grid = build_grid(&p, 0.0, 4.0, 256, Grading::Uniform)?;
    let u0 = DatumSpec::Bump { radius: 1.0, power: 2.0, amplitude: 1.0 }.sample(&p, &grid)?;
    let slices = [0.01, 0.05, 0.2];
    let time = TimeControl { t_end: 0.2, dt: DtPolicy::Adaptive { dt0: 1e-6, dt_max: 5e-3 }, output_times: slices.to_vec(), record_every: 0 };
    let lifted = run(&ProblemSpec::new(p, grid, Boundary::DeltaMdp { support: 1.0, delta: 1e-3 }, u0, time)?)?;
    let mut rh_ok = true;
    for &t in &slices {
        rh_ok &= check_bmo_window(&lifted, &Ball::centered(1.0), t, f64::INFINITY, k6, k7)?[1].pass;
    }
    let ok = dev <= 5e-3 && scale_dev <= 1e-6 && rh_ok;
    outcome(ok, format!("CKN ratio {ratio:.6} vs sharp {sharp:.6} ({dev:.1e}); Poincaré scale deviation {scale_dev:.1e}; reverse Hölder on 3 slices: {rh_ok}"))
}

fn c10_geometry() -> Result<Outcome> {
    let p = p_sep();
    let radii = [0.1, 0.3, 1.0, 3.0, 10.0];
    let mut per = vec![Vec::new(), Vec::new(), Vec::new()];
    for &r in &radii {
        let mut balls = scenario_balls(Scenario::S1, r, 1);
        balls.extend(scenario_balls(Scenario::S2, r, 4));
        balls.extend(scenario_balls(Scenario::S3, r, 4));
        let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
        for ball in &balls {
            a.push(ratio_k16(&p, ball)?);
            b.push(ratio_k18(&p, ball)?);
            c.push(ratio_k19(&p, ball.center_norm, rho(&p, ball)?)?);
        }
        per[0].push(two_sided(&a));
        per[1].push(two_sided(&b));
        per[2].push(two_sided(&c));
    }
    let spread = per
        .iter()
        .map(|v| {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| (x / mean - 1.0).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);

    let f = |r: f64| if r < 1.0 { (1.0 - r * r).powi(2) * (1.0 + r) } else { 0.0 };
    let (x0, r0) = (0.3, 1.0);
    let h1 = compute_hp(&p, &FnField(f), &Ball::new(x0, r0)?, 2.0)?.hp_tilde;
    let mut inv = 0.0f64;
    for lambda in [0.1, 0.5, 3.0, 20.0] {
        let g = move |r: f64| f(r / lambda);
        let h = compute_hp(&p, &FnField(g), &Ball::new(lambda * x0, lambda * r0)?, 2.0)?.hp_tilde;
        inv = inv.max((h / h1 - 1.0).abs());
    }
    outcome(spread <= 0.2 && inv <= 1e-9, format!("κ16/κ18/κ19 spread over R {spread:.2e}; H̃_p scaling deviation {inv:.1e}"))
}

fn main() {
    let criteria: [(&str, f64, fn() -> Result<Outcome>); 10] = [
        ("exact-solution residual", 1.0, c1_residual),
        ("solver convergence", 30.0, c2_convergence),
        ("extinction bracketing", 60.0, c3_extinction),
        ("counterexample discrimination", 30.0, c4_counterexample),
        ("conservation and comparison", 60.0, c5_conservation_comparison),
        ("instantaneous positivity", 120.0, c6_positivity),
        ("Harnack triptych", 120.0, c7_harnack),
        ("Hölder at the origin", 10.0, c8_holder),
        ("functional inequalities", 60.0, c9_functional),
        ("geometry sandwiches", 30.0, c10_geometry),
    ];
    let mut failed = 0;
    for (k, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = f();
        let secs = start.elapsed().as_secs_f64();
        let (pass, detail) = match res {
            Ok(o) => (o.pass && secs < *limit, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!("criterion {:>2} [{}] {name}: {detail} ({secs:.2} s, limit {limit} s)", k + 1, if pass { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
