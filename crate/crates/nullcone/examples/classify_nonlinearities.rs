//! Classify the canonical quadratic nonlinearities through the reduced
//! near-cone system.
//!
//!     cargo run --release --example classify_nonlinearities

use nullcone::asymptotic::{classify, ClassifyParams, QuadraticNonlinearity};

fn main() {
    let params = ClassifyParams::default();
    let cases = [
        ("Q0 null form", QuadraticNonlinearity::null_form_q0()),
        (
            "(d_t phi)^2",
            QuadraticNonlinearity::time_derivative_squared(),
        ),
        (
            "quasilinear model, c'(0) = 1",
            QuadraticNonlinearity::model_linearization(1.0),
        ),
    ];
    for (name, nl) in cases {
        let verdict = classify(&nl, &params).unwrap();
        println!(
            "{name}: {}",
            serde_json::to_string(&verdict).expect("verdict serializes")
        );
    }
}
