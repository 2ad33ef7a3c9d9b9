//! Critical exponents for a few admissible parameter sets, and a rejected one.

use wfde::params::{exponents, iteration_exponents, validate_params, EpsilonChoice};

fn main() -> wfde::Result<()> {
    for (n, gamma, beta, m, p) in [(3, 0.0, 0.0, 0.5, 1.0), (3, 1.0, 0.0, 0.25, 2.0), (4, 1.5, 0.5, 0.7, 1.0)] {
        let params = validate_params(n, gamma, beta, m, p)?;
        let e = exponents(&params);
        println!(
            "N={n} γ={gamma} β={beta} m={m} p={p}: σ={:.4} m_c={:.4} p_c={:.4} ϑ_p={:.4} r*={:.4} q={:.4}",
            e.sigma, e.m_c, e.p_c, e.theta_p, e.r_star, e.q
        );
    }
    let params = validate_params(3, 0.0, 0.0, 0.5, 1.0)?;
    let it = iteration_exponents(&params, EpsilonChoice::Value(0.4), 1.0, 1.0, 1.0)?;
    println!("ε=0.4: k_ε={} s_ε={:.3} η_ε={:.4} ζ_ε={:.4}", it.k_eps, it.s_eps, it.eta_eps, it.zeta_eps);
    match validate_params(3, 1.0, -1.5, 0.5, 2.0) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => println!("unexpectedly accepted"),
    }
    Ok(())
}
