use proptest::prelude::*;
use statrs::function::beta::beta;
use wfde::exact::*;
use wfde::grid::{build_grid, Grading};
use wfde::params::Params;
use wfde::Error;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-300)
}

fn fast() -> Params {
    Params::new(3, 1.0, 0.0, 0.25, 2.0).unwrap()
}

fn good() -> Params {
    Params::new(3, 1.0, 0.0, 0.75, 1.0).unwrap()
}

/// Fourth-order five-point derivatives, written out independently of the library.
fn d1<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

fn d2<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h)
}

/// `u_t − |x|^γ ∇·(|x|^{−β} ∇u^m)` divided by the size of `u_t`.
fn oracle_residual(sol: &Exact, t: f64, r: f64, ht: f64, hr: f64) -> f64 {
    let p = *sol.params();
    let u = |t: f64, r: f64| sol.value(t, r).unwrap();
    let ut = d1(&|s| u(s, r), t, ht);
    let v = |r: f64| u(t, r).powf(p.m);
    let lap = r.powf(p.gamma - p.beta) * (d2(&v, r, hr) + (p.nf() - 1.0 - p.beta) * d1(&v, r, hr) / r);
    (ut - lap) / ut.abs()
}

#[test]
fn separable_amplitude_example() {
    let s = separable(&fast(), 1.0).unwrap();
    assert!(close(s.c, (1.0f64 / 6.0).powf(4.0 / 3.0), 1e-14));
    assert!(close(s.c, 0.0918, 1e-3));
}

#[test]
fn separable_vanishes_at_extinction() {
    let s = separable(&fast(), 0.7).unwrap();
    for &r in &[0.1, 1.0, 10.0] {
        assert_eq!(s.value(0.7, r).unwrap(), 0.0);
    }
    assert!(matches!(s.value(0.3, 0.0), Err(Error::Domain(_))));
}

#[test]
fn separable_rejected_outside_deep_regime() {
    assert!(matches!(separable(&good(), 1.0), Err(Error::Regime(_))));
}

#[test]
fn separable_solves_the_equation() {
    let sol = Exact::Separable(separable(&fast(), 1.0).unwrap());
    for &(t, r) in &[(0.1, 0.3), (0.5, 1.0), (0.8, 2.5)] {
        let lib = relative_residual(&sol, t, r, 0.1, 4).unwrap();
        assert!(lib < 1e-10, "library residual {lib} at ({t}, {r})");
        let ind = oracle_residual(&sol, t, r, 1e-3 * (1.0 - t), 1e-3 * r);
        assert!(ind.abs() < 1e-8, "oracle residual {ind} at ({t}, {r})");
    }
}

#[test]
fn separable_time_monotonicity_is_exact() {
    let s = separable(&fast(), 2.0).unwrap();
    let e = 1.0 / (1.0 - s.params.m);
    for &r in &[0.2, 1.0, 4.0] {
        let base = s.value(0.0, r).unwrap() * 2f64.powf(-e);
        for &t in &[0.3, 1.1, 1.9] {
            let v = s.value(t, r).unwrap() * (2.0 - t).powf(-e);
            assert!(close(v, base, 1e-13));
        }
    }
}

#[test]
fn unweighted_barenblatt_exponents() {
    let p = Params::new(3, 0.0, 0.0, 0.5, 1.0).unwrap();
    let b = barenblatt(&p, BarenblattChoice::D(1.0)).unwrap();
    assert!(close(b.b, 2.0, 1e-14));
    assert!(close(b.a, -6.0, 1e-14));
}

#[test]
fn barenblatt_rejected_below_critical() {
    assert!(matches!(barenblatt(&fast(), BarenblattChoice::D(1.0)), Err(Error::Regime(_))));
}

#[test]
fn barenblatt_solves_the_equation() {
    let sol = Exact::Barenblatt(barenblatt(&good(), BarenblattChoice::D(0.7)).unwrap());
    for &(t, r) in &[(0.5, 0.3), (1.0, 1.0), (3.0, 5.0)] {
        let lib = relative_residual(&sol, t, r, 0.1, 3).unwrap();
        assert!(lib < 1e-8, "library residual {lib}");
        let ind = oracle_residual(&sol, t, r, 1e-3 * t, 1e-3 * r);
        assert!(ind.abs() < 1e-7, "oracle residual {ind}");
    }
}

#[test]
fn barenblatt_mass_matches_beta_function() {
    let p = good();
    let b = barenblatt(&p, BarenblattChoice::D(0.7)).unwrap();
    let k = (p.nf() - p.gamma) / p.sigma();
    let e = 1.0 / (1.0 - p.m);
    let omega = 4.0 * std::f64::consts::PI;
    let want = omega * b.a_coef / p.sigma() * b.d.powf(k - e) * beta(k, e - k);
    assert!(close(b.mass().unwrap(), want, 1e-10));
}

#[test]
fn barenblatt_mass_is_conserved() {
    let b = barenblatt(&good(), BarenblattChoice::Mass(2.0)).unwrap();
    assert!(close(b.mass().unwrap(), 2.0, 1e-10));
    for &t in &[1.0, 2.0, 5.0, 10.0] {
        assert!(close(b.mass_at(t).unwrap(), 2.0, 1e-8), "t = {t}");
    }
}

#[test]
fn barenblatt_value_at_origin() {
    let p = good();
    let b = barenblatt(&p, BarenblattChoice::D(0.7)).unwrap();
    let mut prev = f64::INFINITY;
    for &t in &[0.5, 1.0, 2.0, 4.0] {
        let v = b.value(t, 0.0).unwrap();
        assert!(close(v, t.powf(b.a) * b.a_coef * 0.7f64.powf(1.0 / (p.m - 1.0)), 1e-14));
        assert!(v < prev);
        prev = v;
    }
}

#[test]
fn barenblatt_holder_exponent_at_origin() {
    let p = Params::new(3, 1.5, 0.0, 0.8, 1.0).unwrap();
    let b = barenblatt(&p, BarenblattChoice::D(1.0)).unwrap();
    let dev = |r: f64| (b.value(1.0, 0.0).unwrap() - b.value(1.0, r).unwrap()).abs();
    let (r1, r2) = (1e-6, 1e-5);
    let slope = (dev(r2) / dev(r1)).ln() / (r2 / r1).ln();
    assert!((slope - p.sigma()).abs() < 0.01, "slope {slope} vs σ {}", p.sigma());
}

#[test]
fn sample_lives_on_grid_centers() {
    let p = good();
    let sol = Exact::Barenblatt(barenblatt(&p, BarenblattChoice::D(1.0)).unwrap());
    let g = build_grid(&p, 0.0, 2.0, 16, Grading::Uniform).unwrap();
    let s = sample(&sol, &g, 1.5).unwrap();
    assert_eq!(s.t, 1.5);
    assert_eq!(s.values.len(), 16);
    assert_eq!(s.values[3], sol.value(1.5, g.centers[3]).unwrap());
}

proptest! {
    #[test]
    fn rescaling_maps_barenblatt_to_barenblatt(radius in 0.1f64..10.0, tau in 0.1f64..10.0, t in 0.2f64..5.0, x in 0.0f64..4.0) {
        let p = good();
        let b = barenblatt(&p, BarenblattChoice::D(0.9)).unwrap();
        let m_factor = (radius.powf(p.sigma()) / tau).powf(1.0 / (1.0 - p.m));
        let direct = m_factor * b.value(tau * t, radius * x).unwrap();
        let closed = b.rescaled(radius, tau).value(t, x).unwrap();
        prop_assert!(close(closed, direct, 1e-10), "{} vs {}", closed, direct);
    }

    #[test]
    fn barenblatt_profile_is_radially_decreasing(t in 0.1f64..10.0, r in 0.0f64..5.0, dr in 0.01f64..1.0) {
        let b = barenblatt(&good(), BarenblattChoice::D(1.0)).unwrap();
        prop_assert!(b.value(t, r + dr).unwrap() < b.value(t, r).unwrap());
    }
}
