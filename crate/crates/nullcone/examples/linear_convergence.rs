//! Convergence study of the radial solver against the closed-form
//! d'Alembert solution, plus long-time energy conservation.
//!
//!     cargo run --release --example linear_convergence

use nullcone::solver::{exact_linear_big_phi, reduced_energy, run, Scenario};

fn main() {
    println!("{:>8} {:>14} {:>8}", "dr", "L_inf error", "order");
    let mut prev: Option<f64> = None;
    for lvl in 0..4 {
        let dr = 0.08 / (1 << lvl) as f64;
        let scenario = Scenario::linear(0.1, dr, 4.0);
        let traj = run(&scenario).unwrap();
        let last = traj.last();
        let mut err = 0.0_f64;
        for j in 0..last.n() {
            let oracle = exact_linear_big_phi(&scenario, last.t, last.r_at(j)).unwrap();
            err = err.max((last.big_phi[j] - oracle).abs());
        }
        let order = prev
            .map(|p: f64| format!("{:.2}", (p / err).log2()))
            .unwrap_or_else(|| "-".into());
        println!("{dr:>8} {err:>14.6e} {order:>8}");
        prev = Some(err);
    }

    let scenario = Scenario::linear(0.1, 0.02, 100.0);
    let traj = run(&scenario).unwrap();
    let e0 = reduced_energy(&traj.snapshots[1]);
    let drift = traj.snapshots[2..]
        .iter()
        .map(|s| (reduced_energy(s) - e0).abs() / e0)
        .fold(0.0_f64, f64::max);
    println!("\nenergy drift to t = 100: {drift:.3e}");
}
