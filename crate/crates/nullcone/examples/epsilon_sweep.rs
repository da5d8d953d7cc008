//! Energy growth exponent against data size: γ(ε) shrinks roughly in
//! proportion to ε, the empirical face of the bootstrap argument.
//!
//!     cargo run --release --example epsilon_sweep

use nullcone::diagnostics::{energy, growth_exponent};
use nullcone::solver::{run, Scenario};

fn main() {
    println!("{:>8} {:>12} {:>12}", "eps", "gamma", "gamma/eps");
    let mut prev: Option<f64> = None;
    for eps in [0.04, 0.02, 0.01, 0.005] {
        let scenario = Scenario {
            output_interval: 2.0,
            ..Scenario::model(1.0, eps, 0.05, 200.0)
        };
        let traj = run(&scenario).unwrap();
        let mut series = Vec::new();
        for snap in &traj.snapshots {
            if snap.t >= 20.0 {
                series.push((snap.t, energy(&scenario, snap, None, 0, 0).unwrap()));
            }
        }
        let (gamma, _) = growth_exponent(&series).unwrap();
        let note = prev
            .map(|p: f64| format!("   halving ratio {:.3}", gamma / p))
            .unwrap_or_default();
        println!("{eps:>8} {gamma:>12.6} {:>12.4}{note}", gamma / eps);
        prev = Some(gamma);
    }
}
