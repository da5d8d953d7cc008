//! Null-frame decomposition and reconstruction of a perturbed metric.
//!
//!     cargo run --release --example frame_algebra

use nullcone::frame::{
    contract, decompose, frame_at, frame_decomposition, frame_recompose, reconstruct, SymTensor4,
};

fn main() {
    let omega = [0.36, 0.48, 0.8];
    let frame = frame_at(omega).unwrap();
    println!("frame at omega = {omega:?}");
    println!("  L    = {:?}", frame.l.0);
    println!("  Lbar = {:?}", frame.lbar.0);
    println!("  S1   = {:?}", frame.s1.0);
    println!("  S2   = {:?}", frame.s2.0);

    // A quasilinear-style spatial perturbation H^{ij} = (c² - 1)δ^{ij}.
    let c = 1.05;
    let h = SymTensor4::spatial_isotropic(c * c - 1.0);
    let g = SymTensor4::minkowski().add(&h);

    let comps = decompose(&g, omega).unwrap();
    println!("\nframe components of g = m + H:");
    println!("  g^LL     = {:+.6e}", comps.ll);
    println!("  g^LLbar  = {:+.6e}", comps.llbar);
    println!("  g^LbLb   = {:+.6e}", comps.lbarlbar);
    println!("  tr_bar g = {:+.6e}", comps.trace_tangential());
    println!("  H_LL     = {:+.6e}", contract(&h, &frame.l, &frame.l));

    let back = reconstruct(&comps, omega).unwrap();
    println!("\nreconstruction residual: {:.3e}", back.max_abs_diff(&g));

    let split = frame_decomposition(&h, omega).unwrap();
    let reassembled = frame_recompose(&split, omega).unwrap();
    println!(
        "frame split: ell = {:+.6e}, residual {:.3e}",
        split.ell,
        reassembled.max_abs_diff(&g)
    );
}
