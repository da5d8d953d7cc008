//! Trace the bent outgoing characteristics through a small-data run,
//! assemble ρ and ρ_q two independent ways, and verify the bounds.
//!
//!     cargo run --release --example eikonal_tracing

use nullcone::eikonal::{rho_fields, seed_labels, trace_characteristics, verify_eikonal_bounds};
use nullcone::solver::{run, Scenario};

fn main() {
    let scenario = Scenario {
        output_interval: 1.0,
        ..Scenario::model(1.0, 0.01, 0.05, 60.0)
    };
    let traj = run(&scenario).unwrap();

    let seeds = seed_labels(scenario.t_end, scenario.dr);
    println!("tracing {} labels ...", seeds.len());
    let bundle = trace_characteristics(&traj, &seeds).unwrap();
    let fields = rho_fields(&bundle, &traj).unwrap();

    // Show how far q drifts from the label along a few curves.
    println!("\n{:>8} {:>10} {:>12}", "rho", "q(final)", "q - rho");
    for c in bundle
        .curves
        .iter()
        .filter(|c| !c.samples.is_empty())
        .step_by(60)
    {
        let last = c.samples.last().unwrap();
        println!(
            "{:>8.3} {:>10.5} {:>12.3e}",
            c.rho,
            last[3],
            last[3] - c.rho
        );
    }

    let report = verify_eikonal_bounds(&fields, &traj, scenario.epsilon, 0.9).unwrap();
    println!(
        "\nhypothesis c1 (gradient) : {:.3}",
        report.c1_hypothesis_grad
    );
    println!("hypothesis c1 (amplitude): {:.3}", report.c1_hypothesis_amp);
    println!("fitted c for rho_q bound : {:.3}", report.c1_fitted_rhoq);
    println!("fitted c for q/rho bound : {:.3}", report.c1_fitted_q_rho);
    println!("fitted c2 (second order) : {:.3}", report.c2_fitted);
    println!("rho_q positive           : {}", report.rho_q_positive);
    println!(
        "rho_q method disagreement: {:.2}%",
        100.0 * report.methods_max_rel_diff
    );
    println!(
        "eikonal residual exponent: {:?}",
        report.eikonal_residual_fit.exponent
    );
}
