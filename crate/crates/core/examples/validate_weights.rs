//! Coefficient admissibility, the beta window, the critical horizon and the
//! Carleman weight values for a few coefficient families.

use wavecontrol::{
    beta_bounds, check_admissible, check_time_horizon, rho0_eval, weight_eval, CoefficientField,
    WeightParams,
};

fn main() -> wavecontrol::Result<()> {
    let x0 = -0.05;
    let cases = [
        ("constant a = 1", CoefficientField::constant(1.0)),
        ("nondecreasing a = 1 + x", CoefficientField::affine(1.0, 1.0)),
        ("decreasing a = 2 - 1.9x", CoefficientField::affine(2.0, -1.9)),
        ("transition 1 -> 5", CoefficientField::transition_1_to_5()),
    ];
    println!("admissibility for x0 = {x0}:");
    for (name, a) in &cases {
        let r = check_admissible(a, x0)?;
        print!("  {name:26} lhs = {:+.4}  rhs = {:+.4}  ", r.lhs, r.rhs);
        if r.admissible {
            let (lo, hi) = beta_bounds(a, x0)?;
            let horizon = check_time_horizon(a, x0, 0.99, 2.2)?;
            println!(
                "admissible, beta in ({lo:.3}, {hi:.3}), critical T = {:.3}",
                horizon.critical_t
            );
        } else {
            println!("NOT admissible");
        }
    }

    let w = WeightParams::paper_defaults(2.2);
    println!("\nweights at T = 2.2 (x0 = {}, beta = {}, lambda = {}, s = {}):", w.x0, w.beta, w.lambda, w.s);
    println!("  M0 (minimal)        = {:.6}", w.m0);
    println!("  phi(0, +-T)         = {:.6} (corner minimum)", w.phi(0.0, 2.2));
    println!("  phi(1, 0)           = {:.6} (maximum)", w.phi(1.0, 0.0));
    let v = weight_eval(&w, 1.0, 0.0)?;
    println!("  varphi(1, 0)        = {:.6}", v.varphi);
    println!("  rho(1, T/2)         = {:.6}", w.rho(1.0, 1.1)?);
    println!("  rho0(T/2)           = {:.6}", rho0_eval(&w, 1.1)?);
    println!("  rho0(0)             = {}", rho0_eval(&w, 0.0)?);
    println!("  w0(0) = w0(T)       = {} (assembly form vanishes)", w.control_weight(0.0)?);
    let mut caps = (f64::INFINITY, 0.0_f64);
    for i in 0..=50 {
        for j in 0..=50 {
            let r = w.rho_inv2(i as f64 / 50.0, 2.2 * j as f64 / 50.0)?;
            caps = (caps.0.min(r), caps.1.max(r));
        }
    }
    println!("  rho^-2 range        = [{:.3}, {:.3}]", caps.0, caps.1);
    Ok(())
}
