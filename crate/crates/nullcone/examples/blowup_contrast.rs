//! Lifespan contrast for □φ = (∂_tφ)²: larger data breaks down sooner,
//! with the gradient catastrophe localized near the light cone. The
//! ε = 0.3 lifespan is exponentially long and right-censored at t_end.
//!
//!     cargo run --release --example blowup_contrast

use nullcone::solver::{run, Scenario, Termination};

fn main() {
    let t_end = 240.0;
    println!("{:>6} {:>12} {:>10} {:>10}", "eps", "t*", "r*", "|r*-t*|");
    for eps in [0.3, 0.5, 0.8] {
        let scenario = Scenario {
            t_end,
            r_max: t_end + 3.0,
            output_interval: 2.0,
            ..Scenario::semilinear(eps, 0.02, t_end)
        };
        let traj = run(&scenario).unwrap();
        match &traj.termination {
            Termination::BlowUp { t_star, r_star, .. } => println!(
                "{eps:>6} {t_star:>12.3} {r_star:>10.3} {:>10.3}",
                (r_star - t_star).abs()
            ),
            Termination::Completed => {
                println!("{eps:>6} {:>12} (no blow-up by t = {t_end})", "> t_end")
            }
            Termination::Error { message } => println!("{eps:>6} error: {message}"),
        }
    }
}
