//! Blow-up of the reduced system against the closed-form oracle:
//! with only A11 active, dV/ds = 2 A11 V² per grid point, so plateau data
//! of height v0 breaks down exactly at Δs* = 1/(2 A11 v0).
//!
//!     cargo run --release --example riccati_blowup

use nullcone::asymptotic::{
    integrate_asymptotic, riccati_blowup_oracle, AsymptoticCoefficients, AsymptoticOutcome,
    AsymptoticProfile, IntegrationParams,
};

fn main() {
    let a11 = 0.25;
    let mut a = AsymptoticCoefficients {
        a: [[0.0; 3]; 3],
        omega: [0.0, 0.0, 1.0],
    };
    a.a[1][1] = a11;

    println!(
        "{:>6} {:>12} {:>12} {:>10}",
        "v0", "s*_measured", "s*_oracle", "rel_err"
    );
    for v0 in [0.25, 0.5, 1.0, 2.0] {
        let oracle = riccati_blowup_oracle(a11, v0).unwrap();
        let initial = AsymptoticProfile::plateau(-3.0, 1.0, 401, v0, -2.0, 0.0, 0.5);
        let params = IntegrationParams {
            s_max: 3.0 * oracle,
            blowup_threshold: 1e6 * v0,
            ..Default::default()
        };
        match integrate_asymptotic(&a, &initial, &params).outcome {
            AsymptoticOutcome::BlowUp { s_star, .. } => {
                println!(
                    "{v0:>6} {s_star:>12.6} {oracle:>12.6} {:>10.2e}",
                    (s_star - oracle).abs() / oracle
                );
            }
            other => println!("{v0:>6} unexpected outcome {other:?}"),
        }
    }
    // The tiny-amplitude case shows the exponential lifespan: Δs* = 200
    // means blow-up only at t ~ e^200 in physical time.
    println!(
        "\nv0 = 0.01 oracle: Δs* = {} (lifespan exp(Δs*) in t)",
        riccati_blowup_oracle(a11, 0.01).unwrap()
    );
}
