use proptest::prelude::*;
use wfde::datum::DatumSpec;
use wfde::exact::{separable, Exact};
use wfde::grid::{build_grid, Grading, Snapshot, WeightedGrid};
use wfde::io::{read_trajectory_csv, read_trajectory_json, write_trajectory_csv, write_trajectory_json};
use wfde::params::Params;
use wfde::solver::*;
use wfde::Error;

fn fast() -> Params {
    Params::new(3, 1.0, 0.0, 0.25, 2.0).unwrap()
}

fn good() -> Params {
    Params::new(3, 1.0, 0.0, 0.75, 1.0).unwrap()
}

fn bump() -> DatumSpec {
    DatumSpec::Bump { radius: 1.0, power: 2.0, amplitude: 1.0 }
}

fn ball_spec(p: Params, cells: usize, bc: Boundary, datum: &DatumSpec, t_end: f64, outputs: Vec<f64>) -> ProblemSpec {
    let g = build_grid(&p, 0.0, 4.0, cells, Grading::Uniform).unwrap();
    let u0 = datum.sample(&p, &g).unwrap();
    let time = TimeControl { t_end, dt: DtPolicy::Adaptive { dt0: 1e-4, dt_max: t_end / 50.0 }, output_times: outputs, record_every: 0 };
    ProblemSpec::new(p, g, bc, u0, time).unwrap()
}

fn lp(grid: &WeightedGrid, s: &Snapshot, p: f64) -> f64 {
    s.values.iter().zip(&grid.w_gamma).map(|(u, w)| w * u.powf(p)).sum::<f64>().powf(1.0 / p)
}

#[test]
fn zero_datum_is_extinct_at_once() {
    let p = fast();
    let g = build_grid(&p, 0.0, 4.0, 32, Grading::Uniform).unwrap();
    let u0 = Snapshot { t: 0.0, values: vec![0.0; 32] };
    let time = TimeControl { t_end: 0.1, dt: DtPolicy::Fixed(0.01), output_times: vec![], record_every: 1 };
    let mut spec = ProblemSpec::new(p, g, Boundary::Mdp { support: 1.0 }, u0, time).unwrap();
    spec.extinction.tol = Some(1e-12);
    let traj = run(&spec).unwrap();
    assert!(traj.snapshots.iter().all(|s| s.values.iter().all(|&u| u == 0.0)));
    assert_eq!(detect_extinction(&traj, &spec, 1e-12).unwrap(), 0.0);
}

#[test]
fn zero_flux_never_extinguishes() {
    let mut spec = ball_spec(good(), 64, Boundary::ZeroFlux, &bump(), 0.5, vec![0.5]);
    spec.extinction.stop = false;
    let traj = run(&spec).unwrap();
    let m0 = traj.initial().mass(&spec.grid);
    let m1 = traj.snapshots.last().unwrap().mass(&spec.grid);
    assert!(((m1 - m0) / m0).abs() < 1e-12);
    assert!(matches!(detect_extinction(&traj, &spec, 1e-8), Err(Error::NotExtinct { .. })));
}

#[test]
fn constant_state_is_steady_under_zero_flux() {
    let p = fast();
    let g = build_grid(&p, 0.0, 2.0, 16, Grading::Uniform).unwrap();
    let u0 = Snapshot { t: 0.0, values: vec![0.3; 16] };
    let time = TimeControl { t_end: 0.1, dt: DtPolicy::Fixed(0.01), output_times: vec![], record_every: 1 };
    let spec = ProblemSpec::new(p, g, Boundary::ZeroFlux, u0.clone(), time).unwrap();
    let (next, _) = step_implicit(&spec, &u0, 0.01).unwrap();
    for v in next.values {
        assert!((v - 0.3).abs() < 1e-14);
    }
}

#[test]
fn mdp_support_condition_is_enforced() {
    let p = fast();
    let g = build_grid(&p, 0.0, 3.0, 32, Grading::Uniform).unwrap();
    let u0 = bump().sample(&p, &g).unwrap();
    let time = TimeControl { t_end: 0.1, dt: DtPolicy::Fixed(0.01), output_times: vec![], record_every: 1 };
    assert!(matches!(ProblemSpec::new(p, g, Boundary::Mdp { support: 1.0 }, u0, time), Err(Error::Domain(_))));
}

#[test]
fn negative_datum_is_rejected() {
    let p = fast();
    let g = build_grid(&p, 0.0, 4.0, 8, Grading::Uniform).unwrap();
    let mut values = vec![0.1; 8];
    values[2] = -1e-3;
    let time = TimeControl { t_end: 0.1, dt: DtPolicy::Fixed(0.01), output_times: vec![], record_every: 1 };
    assert!(matches!(
        ProblemSpec::new(p, g, Boundary::Mdp { support: 1.0 }, Snapshot { t: 0.0, values }, time),
        Err(Error::Nonphysical(_))
    ));
}

#[test]
fn lp_norms_do_not_grow() {
    let spec = ball_spec(fast(), 128, Boundary::Mdp { support: 1.0 }, &bump(), 0.05, vec![0.01, 0.02, 0.05]);
    let traj = run(&spec).unwrap();
    let u0 = spec.prepared_initial();
    for &q in &[1.0, 2.0, 4.0] {
        let n0 = lp(&spec.grid, &u0, q);
        for s in &traj.snapshots {
            assert!(lp(&spec.grid, s, q) <= n0 * (1.0 + 1e-8), "p = {q} at t = {}", s.t);
        }
    }
}

#[test]
fn times_strictly_increase() {
    let mut spec = ball_spec(fast(), 64, Boundary::Mdp { support: 1.0 }, &bump(), 0.05, vec![0.02, 0.05]);
    spec.time.record_every = 3;
    let traj = run(&spec).unwrap();
    assert!(traj.times().windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn delta_runs_are_ordered() {
    let spec = ball_spec(fast(), 96, Boundary::Mdp { support: 1.0 }, &bump(), 0.05, vec![0.01, 0.03, 0.05]);
    let cont = run_delta_continuation(&spec, &[4e-3, 2e-3, 1e-3]).unwrap();
    for pair in cont.runs.windows(2) {
        for (a, b) in pair[0].snapshots.iter().zip(&pair[1].snapshots) {
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!(x + 1e-9 >= *y, "{x} < {y} at t = {}", a.t);
            }
        }
    }
    assert_eq!(cont.extrapolated.snapshots.len(), cont.runs[0].snapshots.len());
}

#[test]
fn delta_runs_satisfy_time_monotonicity() {
    let p = fast();
    let spec = ball_spec(p, 96, Boundary::DeltaMdp { support: 1.0, delta: 1e-3 }, &bump(), 0.05, (1..=10).map(|k| 0.005 * k as f64).collect());
    let traj = run(&spec).unwrap();
    let e = -1.0 / (1.0 - p.m);
    for w in traj.snapshots[1..].windows(2) {
        for (a, b) in w[0].values.iter().zip(&w[1].values) {
            let (x, y) = (w[0].t.powf(e) * a, w[1].t.powf(e) * b);
            assert!(y <= x * (1.0 + 1e-6), "{y} > {x}");
        }
    }
}

#[test]
fn delta_continuation_needs_a_ball_problem() {
    let spec = ball_spec(good(), 32, Boundary::ZeroFlux, &bump(), 0.01, vec![]);
    assert!(run_delta_continuation(&spec, &[1e-3]).is_err());
}

#[test]
fn neville_is_exact_on_polynomials() {
    let xs = [0.4, 0.2, 0.1];
    let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x + 5.0 * x * x).collect();
    assert!((extrapolate_to_zero(&xs, &ys) - 3.0).abs() < 1e-13);
}

#[test]
fn separable_trace_one_step_error_is_first_order() {
    let p = fast();
    let exact = Exact::Separable(separable(&p, 1.0).unwrap());
    let g = build_grid(&p, 0.25, 1.0, 256, Grading::Uniform).unwrap();
    let u0 = wfde::exact::sample(&exact, &g, 0.0).unwrap();
    let time = TimeControl { t_end: 0.5, dt: DtPolicy::Fixed(0.01), output_times: vec![], record_every: 1 };
    let spec = ProblemSpec::new(p, g.clone(), Boundary::ExactTrace(exact), u0.clone(), time).unwrap();
    let err = |dt: f64| {
        let (s, _) = step_implicit(&spec, &u0, dt).unwrap();
        let e = wfde::exact::sample(&exact, &g, dt).unwrap();
        s.values.iter().zip(&e.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let errs: Vec<f64> = [0.08, 0.04, 0.02].iter().map(|&dt| err(dt)).collect();
    for w in errs.windows(2) {
        assert!(w[0] / w[1] > 1.8, "errors {errs:?}");
    }
    assert!(errs[0] < 0.08 * 0.01);
}

#[test]
fn separable_trace_extinguishes_near_exact_time() {
    let p = fast();
    let exact = Exact::Separable(separable(&p, 0.3).unwrap());
    let g = build_grid(&p, 0.25, 1.0, 128, Grading::Uniform).unwrap();
    let u0 = wfde::exact::sample(&exact, &g, 0.0).unwrap();
    let time = TimeControl { t_end: 0.6, dt: DtPolicy::Adaptive { dt0: 1e-4, dt_max: 2e-3 }, output_times: vec![], record_every: 0 };
    let spec = ProblemSpec::new(p, g, Boundary::ExactTrace(exact), u0, time).unwrap();
    let traj = run(&spec).unwrap();
    let t = traj.extinction.expect("extinction recorded");
    assert!((t - 0.3).abs() / 0.3 < 0.02, "T = {t}");
}

#[test]
fn trajectory_files_round_trip() {
    let spec = ball_spec(fast(), 32, Boundary::Mdp { support: 1.0 }, &bump(), 0.02, vec![0.01, 0.02]);
    let traj = run(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let jp = dir.path().join("t.json");
    let cp = dir.path().join("t.csv");
    write_trajectory_json(&jp, &traj).unwrap();
    write_trajectory_csv(&cp, &traj).unwrap();
    let back = read_trajectory_json(&jp).unwrap();
    assert_eq!(back.snapshots, traj.snapshots);
    assert_eq!(back.grid, traj.grid);
    let (centers, snaps) = read_trajectory_csv(&cp).unwrap();
    assert_eq!(centers, traj.grid.centers);
    assert_eq!(snaps, traj.snapshots);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn comparison_principle(base in proptest::collection::vec(0.0f64..1.0, 24), extra in proptest::collection::vec(0.0f64..0.5, 24)) {
        let p = fast();
        let g = build_grid(&p, 0.0, 4.0, 24, Grading::Uniform).unwrap();
        let time = TimeControl { t_end: 0.02, dt: DtPolicy::Fixed(0.005), output_times: vec![], record_every: 1 };
        let lo = Snapshot { t: 0.0, values: base.clone() };
        let hi = Snapshot { t: 0.0, values: base.iter().zip(&extra).map(|(a, b)| a + b).collect() };
        let bc = Boundary::DeltaMdp { support: 1.0, delta: 1e-3 };
        let mut s1 = ProblemSpec::new(p, g.clone(), bc.clone(), lo, time.clone()).unwrap();
        let mut s2 = ProblemSpec::new(p, g, bc, hi, time).unwrap();
        s1.extinction.stop = false;
        s2.extinction.stop = false;
        let (a, b) = (run(&s1).unwrap(), run(&s2).unwrap());
        for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
            prop_assert!((x.t - y.t).abs() < 1e-14);
            for (u, v) in x.values.iter().zip(&y.values) {
                prop_assert!(*u <= v + 1e-9);
            }
        }
    }

    #[test]
    fn zero_flux_conserves_mass_per_step(amp in 0.1f64..5.0, radius in 0.3f64..1.5) {
        let p = good();
        let g = build_grid(&p, 0.0, 2.0, 48, Grading::Geometric(1.03)).unwrap();
        let u0 = DatumSpec::Bump { radius, power: 2.0, amplitude: amp }.sample(&p, &g).unwrap();
        let m0 = u0.mass(&g);
        let time = TimeControl { t_end: 0.05, dt: DtPolicy::Fixed(0.01), output_times: vec![], record_every: 1 };
        let spec = ProblemSpec::new(p, g.clone(), Boundary::ZeroFlux, u0.clone(), time).unwrap();
        let mut cur = u0;
        for _ in 0..5 {
            cur = step_implicit(&spec, &cur, 0.01).unwrap().0;
            prop_assert!(((cur.mass(&g) - m0) / m0).abs() < 1e-13);
        }
    }
}
