//! The headline small-data run: -∂_t²φ + (1+φ)²Δφ = 0 with ε = 0.01 to
//! t = 200, with decay-rate fits and the energy growth exponent.
//!
//!     cargo run --release --example model_small_data

use nullcone::diagnostics::{decay_fit, energy, growth_exponent, DecayQuantity};
use nullcone::eikonal::{rho_fields, seed_labels, trace_characteristics};
use nullcone::solver::{run, Scenario};

fn main() {
    let scenario = Scenario {
        output_interval: 2.0,
        ..Scenario::model(1.0, 0.01, 0.025, 200.0)
    };
    println!("running model scenario to t = {} ...", scenario.t_end);
    let traj = run(&scenario).unwrap();
    println!("termination: {:?}", traj.termination);

    let bundle = trace_characteristics(&traj, &seed_labels(scenario.t_end, scenario.dr)).unwrap();
    let fields = rho_fields(&bundle, &traj).unwrap();

    for (q, near) in [
        (DecayQuantity::SupPhi, true),
        (DecayQuantity::SupDPhi, true),
        (DecayQuantity::SupDPhiRhoWeighted { nu: 0.9 }, true),
        (DecayQuantity::SupZPhi, false),
    ] {
        match decay_fit(&traj, Some(&fields), q, (20.0, 200.0), near) {
            Ok(fit) => println!(
                "fit {:<32} exponent {:+.4} constant {:.3e}",
                fit.quantity,
                fit.exponent.unwrap_or(f64::NAN),
                fit.constant
            ),
            Err(e) => println!("fit failed: {e}"),
        }
    }

    let mut series = Vec::new();
    for snap in &traj.snapshots {
        if snap.t >= 20.0 {
            series.push((snap.t, energy(&scenario, snap, None, 0, 0).unwrap()));
        }
    }
    let (gamma, residual) = growth_exponent(&series).unwrap();
    println!("energy growth exponent gamma = {gamma:+.5} (fit residual {residual:.2e})");
}
