//! Margins of the measured inequalities on a small-data model run:
//! the weighted energy estimate, the constant-32 Poincaré estimate, and
//! the Klainerman-Sobolev bound.
//!
//!     cargo run --release --example inequality_suite

use nullcone::diagnostics::{
    energy_inequality_check, klainerman_sobolev_check, poincare_check, KS_REFERENCE_CONSTANT,
};
use nullcone::eikonal::{rho_fields, seed_labels, trace_characteristics, verify_eikonal_bounds};
use nullcone::solver::{run, Scenario};

fn main() {
    let scenario = Scenario {
        output_interval: 1.0,
        ..Scenario::model(1.0, 0.01, 0.05, 60.0)
    };
    let eps = scenario.epsilon;
    let traj = run(&scenario).unwrap();
    let bundle = trace_characteristics(&traj, &seed_labels(scenario.t_end, scenario.dr)).unwrap();
    let fields = rho_fields(&bundle, &traj).unwrap();
    let bounds = verify_eikonal_bounds(&fields, &traj, eps, 0.9).unwrap();

    let nu_prime = 0.5;
    let kappa = 2.0 * bounds.c2_fitted / nu_prime + 1.0;
    println!(
        "kappa = 2 c2 / nu' + 1 = {kappa:.2} (measured c2 = {:.2})\n",
        bounds.c2_fitted
    );

    let e_rep = energy_inequality_check(&traj, &fields, kappa, eps, nu_prime).unwrap();
    println!("weighted energy estimate:");
    println!("  min margin   = {:+.4e}", e_rep.min_margin());
    println!("  min constant = {:.4}", e_rep.min_constant);
    for f in &e_rep.flags {
        println!("  note: {f}");
    }

    let p_rep = poincare_check(&traj, &fields, kappa, eps, nu_prime, bounds.c2_fitted).unwrap();
    println!("\nPoincare estimate (constant 32):");
    println!("  min margin           = {:+.4e}", p_rep.min_margin());
    println!("  measured minimal C   = {:.4}", p_rep.min_constant * 32.0);
    for f in &p_rep.flags {
        println!("  note: {f}");
    }

    let k_rep = klainerman_sobolev_check(&traj).unwrap();
    println!("\nKlainerman-Sobolev bound:");
    println!("  min margin           = {:+.4e}", k_rep.min_margin());
    println!(
        "  measured minimal C   = {:.4} (reference {KS_REFERENCE_CONSTANT})",
        k_rep.min_constant * KS_REFERENCE_CONSTANT
    );
}
