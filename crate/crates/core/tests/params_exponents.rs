use proptest::prelude::*;
use wfde::params::{exponents, iteration_exponents, validate_params, EpsilonChoice, Params};
use wfde::Error;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn unweighted_case_is_valid() {
    let p = validate_params(3, 0.0, 0.0, 0.5, 1.0).unwrap();
    let e = exponents(&p);
    assert!(close(e.m_c, 1.0 / 3.0, 1e-15));
    assert_eq!(e.sigma, 2.0);
    assert!(close(e.r_star, 6.0, 1e-15));
}

#[test]
fn weighted_reference_point() {
    let p = validate_params(3, 1.0, 0.0, 0.25, 2.0).unwrap();
    let e = exponents(&p);
    assert!(close(e.m_c, 0.5, 1e-15));
    assert_eq!(e.sigma, 1.0);
    assert!(close(e.r_star, 4.0, 1e-15));
    assert!(close(e.p_c, 1.5, 1e-15));
    assert!(close(e.theta_p, 2.0, 1e-14));
    assert!(close(e.q, 2.0, 1e-15));
}

#[test]
fn hardy_side_violation_is_named() {
    let err = validate_params(3, 1.0, -1.5, 0.5, 2.0).unwrap_err();
    match err {
        Error::RangeViolation(msg) => assert!(msg.contains("γ−2 < β") || msg.contains("γ-2") || msg.contains("−1"), "{msg}"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn other_violations() {
    assert!(validate_params(3, 3.0, 0.0, 0.5, 2.0).is_err());
    assert!(validate_params(3, 1.0, 0.5, 0.5, 2.0).is_err());
    assert!(validate_params(3, 1.0, 0.0, 1.0, 2.0).is_err());
    assert!(validate_params(3, 1.0, 0.0, 0.25, 1.2).is_err());
    assert!(validate_params(2, 0.0, 0.0, 0.5, 2.0).is_err());
    assert!(validate_params(3, 1.0, -1.0, 0.5, 2.0).is_err());
}

#[test]
fn good_range_accepts_p_one() {
    assert!(validate_params(3, 1.0, 0.0, 0.6, 1.0).is_ok());
}

#[test]
fn linear_mode_is_kept_off_the_solver_path() {
    let p = Params::linear(3, 1.0, 0.0).unwrap();
    assert!(p.require_nonlinear().is_err());
}

#[test]
fn iteration_exponent_examples() {
    let p = validate_params(3, 0.0, 0.0, 0.5, 1.0).unwrap();
    let a = iteration_exponents(&p, EpsilonChoice::Value(0.4), 1.0, 1.0, 1.0).unwrap();
    assert_eq!(a.k_eps, 1);
    assert!(close(a.s_eps, 1.2, 1e-14));
    let b = iteration_exponents(&p, EpsilonChoice::Value(0.49), 1.0, 1.0, 1.0).unwrap();
    assert_eq!(b.k_eps, 1);
    assert!(close(b.s_eps, 1.47, 1e-14));
    assert!(iteration_exponents(&p, EpsilonChoice::Value(0.6), 1.0, 1.0, 1.0).is_err());
    assert!(iteration_exponents(&p, EpsilonChoice::Value(0.0), 1.0, 1.0, 1.0).is_err());
}

#[test]
fn eta_formula_independent_rederivation() {
    // (N−γ)/σ + 1 for N = 3, γ = 1, β = 0 is 3; with m = 1/2, s = 6/5 the prefactor is 1/0.7.
    let p = validate_params(3, 1.0, 0.0, 0.5, 2.0).unwrap();
    let e = iteration_exponents(&p, EpsilonChoice::Value(0.3), 1.0, 1.0, 1.0).unwrap();
    let expected = -(1.0 / (e.s_eps + 0.5 - 1.0)) * ((3.0 - 1.0) / 1.0 + 1.0);
    assert!(close(e.eta_eps, expected, 1e-14));
    assert!(e.eta_eps < 0.0 && e.zeta_eps < 0.0);
    let s = 1.2;
    assert!(close(-(1.0 / (s + 0.5 - 1.0)) * 3.0, -30.0 / 7.0, 1e-14));
}

prop_compose! {
    fn valid_params()(n in 3u32..6, g in 0.0f64..1.0, b in 0.0f64..1.0, m in 0.05f64..0.95, pf in 0.0f64..1.0)
        -> Params {
        let nf = n as f64;
        let gamma = -1.5 + g * (nf - 0.6);
        let lo = gamma - 2.0 + 1e-3;
        let hi = (nf - 2.0) * gamma / nf;
        let beta = lo + b * (hi - lo);
        let probe = Params::linear(n, gamma, beta).unwrap();
        let pc = (1.0 - m) * (nf - gamma) / probe.sigma();
        let p = 1.0f64.max(pc) + 1e-3 + 3.0 * pf;
        validate_params(n, gamma, beta, m, p).unwrap()
    }
}

proptest! {
    #[test]
    fn theta_positive_iff_above_critical(p in valid_params(), x in 0.5f64..3.0) {
        let q = x * p.p_c();
        prop_assert_eq!(q > p.p_c(), p.theta(q) > 0.0);
    }

    #[test]
    fn r_star_two_ways(p in valid_params()) {
        let q = p.q();
        prop_assert!(close(p.r_star(), 2.0 * q / (q - 1.0), 1e-12));
        prop_assert!(p.r_star() >= 2.0 - 1e-12 && p.r_star() <= 2.0 * p.nf() / (p.nf() - 2.0) + 1e-12);
    }

    #[test]
    fn critical_exponents(p in valid_params()) {
        let e = exponents(&p);
        prop_assert!(e.m_c > 0.0 && e.m_c < 1.0);
        prop_assert!(e.sigma > 0.0);
        prop_assert_eq!(e.p_c > 1.0, p.m < e.m_c);
        prop_assert!(close(e.sigma * e.theta_p * (p.p - e.p_c), 1.0, 1e-12));
    }

    #[test]
    fn p_c_decreases_to_one_at_m_c(p in valid_params()) {
        let mc = p.m_c();
        let ms: Vec<f64> = (1..=20).map(|k| mc * k as f64 / 20.0).collect();
        let pcs: Vec<f64> = ms.iter().map(|&m| (1.0 - m) * (p.nf() - p.gamma) / p.sigma()).collect();
        prop_assert!(pcs.windows(2).all(|w| w[1] < w[0]));
        prop_assert!(close(*pcs.last().unwrap(), 1.0, 1e-12));
    }
}
