//! Quantitative verification of decay, energy, and Sobolev-type estimates
//! on solver output.
//!
//! Everything here is a pure function over immutable trajectories. The
//! radial measure is dx = 4π r² dr, so the L² quantities agree with the
//! three-dimensional ones for radial fields. Weighted energies use the
//! ghost-weight w = exp(σ V(ρ)) with σ = κ ε ln(1+t) and V(ρ) = |ρ-2|^{-ν'}
//! evaluated on the eikonal fields.

mod fits;
mod inequality;

pub use fits::{decay_fit, growth_exponent, DecayQuantity};
pub use inequality::{
    energy_inequality_check, hormander_check, hormander_corollary_check, klainerman_sobolev_check,
    poincare_check, KS_REFERENCE_CONSTANT,
};

use crate::error::{Error, Result};
use crate::grid::{self, GridField2D, VectorFieldId};
use crate::solver::{window_at, RadialSnapshot, Scenario};

/// The ghost weight at one snapshot time.
#[derive(Debug, Clone)]
pub struct WeightField {
    pub t: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub nu_prime: f64,
    /// σ = κ ε ln(1+t).
    pub sigma: f64,
    pub values: Vec<f64>,
}

/// w = exp(σ V(ρ)), V(ρ) = |ρ-2|^{-ν'} with ρ clamped to (-∞, 1]. ρ > 1 is
/// outside the support where fields vanish; finding ρ > 1 under a nonzero
/// field is an invariant violation.
pub fn weight_field(
    snap: &RadialSnapshot,
    rho_row: &[f64],
    kappa: f64,
    epsilon: f64,
    nu_prime: f64,
) -> Result<WeightField> {
    let sigma = kappa * epsilon * (1.0 + snap.t).ln();
    // The violation guard allows the discrete support edge: the stencil
    // smears the field over the documented margin beyond ρ = 1, at
    // amplitudes far below the snapshot sup.
    let sup_phi = snap.phi.iter().fold(0.0_f64, |m, p| m.max(p.abs()));
    let floor = 1e-3 * sup_phi;
    let rho_edge = 1.0 + crate::solver::SUPPORT_MARGIN_CELLS * snap.dr;
    let mut values = Vec::with_capacity(snap.n());
    for j in 0..snap.n() {
        let rho = rho_row[j];
        if rho > rho_edge && snap.phi[j].abs() > floor {
            return Err(Error::InvariantViolation(format!(
                "rho = {rho} > 1 where phi = {} at r = {}",
                snap.phi[j],
                snap.r_at(j)
            )));
        }
        let rho_c = rho.min(1.0);
        let v = (rho_c - 2.0).abs().powf(-nu_prime);
        values.push((sigma * v).exp());
    }
    Ok(WeightField {
        t: snap.t,
        kappa,
        epsilon,
        nu_prime,
        sigma,
        values,
    })
}

/// Trapezoid quadrature of Σ f_j against the radial measure 4π r² dr.
/// Non-finite integrand points (invalid stencil rings) contribute zero;
/// they sit at the grid edges where the integrand vanishes anyway.
pub fn radial_integral(f: &[f64], dr: f64, r_first: f64) -> f64 {
    let n = f.len();
    if n < 2 {
        return 0.0;
    }
    let val = |j: usize| {
        let r = r_first + j as f64 * dr;
        let v = f[j];
        if v.is_finite() {
            v * r * r
        } else {
            0.0
        }
    };
    let mut s = 0.5 * (val(0) + val(n - 1));
    for j in 1..n - 1 {
        s += val(j);
    }
    4.0 * std::f64::consts::PI * s * dr
}

/// Window wide enough for `max_order` nested derivatives around a snapshot,
/// served at decreasing widths without re-integration.
pub struct StencilWindow {
    base: GridField2D,
}

impl StencilWindow {
    pub fn build(scenario: &Scenario, snap: &RadialSnapshot, max_order: usize) -> Result<Self> {
        let dt_w = 0.5 * scenario.cfl * scenario.dr;
        let base = window_at(scenario, snap, max_order.max(1), dt_w)?;
        Ok(StencilWindow { base })
    }

    pub fn supplier(&self) -> impl FnMut(usize) -> Result<GridField2D> + '_ {
        move |n| self.base.trim_levels(n)
    }

    /// Center row of the word applied to φ.
    pub fn apply_word(&self, word: &[VectorFieldId]) -> Result<Vec<f64>> {
        let f = grid::apply_multi(&mut self.supplier(), word)?;
        Ok(f.center().to_vec())
    }
}

/// E_{k,i} = Σ_{|k'| <= k, |I| <= i} ∫ |∂ ∂^{k'} Z^I φ|² w dx over the
/// ordered stencil words, with |∂ψ|² = (∂_tψ)² + (∂_rψ)².
pub fn energy(
    scenario: &Scenario,
    snap: &RadialSnapshot,
    weight: Option<&WeightField>,
    k: usize,
    i: usize,
) -> Result<f64> {
    if k + i > 3 {
        return Err(Error::Unsupported(format!(
            "energy order k + i = {} exceeds the desk-scale cap 3",
            k + i
        )));
    }
    let window = StencilWindow::build(scenario, snap, 1 + k + i)?;
    let n = snap.n();
    // The field vanishes analytically beyond the support; masking there
    // keeps the t²-weighted S, K words from amplifying the stencil
    // precursor into the quadrature.
    let support = snap.support_radius();
    let mut integrand = vec![0.0; n];
    for pword in grid::partial_words(0, k) {
        for zword in grid::field_words(0, i) {
            for outer in [VectorFieldId::Dt, VectorFieldId::Dr] {
                let mut word = vec![outer];
                word.extend_from_slice(&pword);
                word.extend_from_slice(&zword);
                let row = window.apply_word(&word)?;
                for j in 0..n {
                    if row[j].is_finite() && snap.r_at(j) <= support {
                        let w = weight.map(|w| w.values[j]).unwrap_or(1.0);
                        integrand[j] += row[j] * row[j] * w;
                    }
                }
            }
        }
    }
    Ok(radial_integral(&integrand, snap.dr, snap.r_first))
}

/// Energies of one snapshot for all k + i <= cap, plus the unweighted E_N.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EnergyRecord {
    pub t: f64,
    /// (k, i, E_{k,i}) entries in lexicographic order.
    pub weighted: Vec<(usize, usize, f64)>,
    /// Unweighted E_N = Σ_{|I| <= N} ∫ |∂Z^Iφ|² dx for N = 0..=cap.
    pub e_n: Vec<f64>,
}

pub fn energy_record(
    scenario: &Scenario,
    snap: &RadialSnapshot,
    weight: Option<&WeightField>,
    cap: usize,
) -> Result<EnergyRecord> {
    let mut weighted = Vec::new();
    for k in 0..=cap {
        for i in 0..=(cap - k) {
            weighted.push((k, i, energy(scenario, snap, weight, k, i)?));
        }
    }
    let mut e_n = Vec::new();
    for n in 0..=cap {
        e_n.push(energy(scenario, snap, None, 0, n)?);
    }
    Ok(EnergyRecord {
        t: snap.t,
        weighted,
        e_n,
    })
}

/// Closed-form conclusion of the Gronwall-type lemma:
/// E(t) <= (4E(0) + A)(1+t)^{2Bε} whenever
/// E(t) <= 4E(0) + ∫₀ᵗ Bε/(1+τ) (E(τ) + A(1+τ)^{Bε}) dτ.
pub fn gronwall_oracle(e0: f64, a: f64, b: f64, epsilon: f64, t: f64) -> f64 {
    (4.0 * e0 + a) * (1.0 + t).powf(2.0 * b * epsilon)
}

/// Verify the integral hypothesis of the Gronwall lemma for a sampled E(t)
/// (fine trapezoid in τ between samples).
pub fn gronwall_hypothesis_holds(samples: &[(f64, f64)], a: f64, b: f64, epsilon: f64) -> bool {
    if samples.is_empty() {
        return false;
    }
    let e0 = samples[0].1;
    let mut integral = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for &(t, e) in samples {
        if let Some((tp, ip)) = prev {
            integral += 0.5 * (t - tp) * (ip + integrand(t, e, a, b, epsilon));
        }
        if e > 4.0 * e0 + integral + 1e-12 * (1.0 + e.abs()) {
            return false;
        }
        prev = Some((t, integrand(t, e, a, b, epsilon)));
    }
    return true;

    fn integrand(t: f64, e: f64, a: f64, b: f64, epsilon: f64) -> f64 {
        b * epsilon / (1.0 + t) * (e + a * (1.0 + t).powf(b * epsilon))
    }
}

/// a^ν b^{1-ν} <= a + b for a, b > 0, 0 < ν < 1 (used inside the decay
/// proofs; exposed as a tested utility).
pub fn weighted_gm_bound(a: f64, b: f64, nu: f64) -> f64 {
    a.powf(nu) * b.powf(1.0 - nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{reduced_energy, run, Scenario};

    #[test]
    fn weight_degenerate_cases() {
        let scenario = Scenario::linear(0.01, 0.05, 2.0);
        let traj = run(&scenario).unwrap();
        let snap = &traj.snapshots[0];
        let rho: Vec<f64> = (0..snap.n()).map(|j| snap.r_at(j) - snap.t).collect();
        // κ = 0 makes w ≡ 1, and so does t = 0.
        let w = weight_field(snap, &rho, 0.0, 0.01, 0.5).unwrap();
        assert!(w.values.iter().all(|&v| v == 1.0));
        let w = weight_field(snap, &rho, 3.0, 0.01, 0.5).unwrap();
        assert!(w.values.iter().all(|&v| v == 1.0), "t = 0 forces σ = 0");
    }

    #[test]
    fn weight_point_value() {
        // ρ = 0, κε = 0.1, t = e-1, ν' = 0.5: w = exp(0.1·2^{-1/2}) ≈ 1.0733.
        let sigma = 0.1 * (1.0_f64 + (std::f64::consts::E - 1.0)).ln();
        let v = 2.0_f64.powf(-0.5);
        let w = (sigma * v).exp();
        assert!((w - 1.0733).abs() < 1e-4, "w = {w}");
    }

    #[test]
    fn weight_monotone_in_kappa_and_t() {
        let scenario = Scenario::linear(0.01, 0.05, 4.0);
        let traj = run(&scenario).unwrap();
        let early = &traj.snapshots[1];
        let late = traj.last();
        let rho_row = |s: &crate::solver::RadialSnapshot| -> Vec<f64> {
            (0..s.n()).map(|j| (s.r_at(j) - s.t).min(1.0)).collect()
        };
        let w1 = weight_field(early, &rho_row(early), 1.0, 0.01, 0.5).unwrap();
        let w2 = weight_field(early, &rho_row(early), 2.0, 0.01, 0.5).unwrap();
        for j in 0..early.n() {
            assert!(w2.values[j] >= w1.values[j]);
        }
        let w_late = weight_field(late, &rho_row(late), 1.0, 0.01, 0.5).unwrap();
        // Same ρ value: larger t strictly increases w (σ grows).
        let v_early = w1.values[0];
        let v_late = w_late.values[0];
        assert!(v_late > v_early);
    }

    #[test]
    fn weight_rejects_support_violation() {
        let scenario = Scenario::linear(0.01, 0.05, 2.0);
        let traj = run(&scenario).unwrap();
        let snap = &traj.snapshots[0];
        let rho = vec![3.0; snap.n()];
        assert!(weight_field(snap, &rho, 1.0, 0.01, 0.5).is_err());
    }

    #[test]
    fn zero_field_has_zero_energy() {
        let scenario = Scenario::linear(1e-30, 0.05, 2.0);
        let traj = run(&scenario).unwrap();
        let e = energy(&scenario, traj.last(), None, 0, 0).unwrap();
        assert!(e < 1e-40);
    }

    #[test]
    fn energy_matches_independent_quadrature() {
        // E_{0,0} with w ≡ 1 equals the standard energy; compare with the
        // closed-form reduced energy to stencil accuracy.
        let scenario = Scenario::linear(0.1, 0.02, 3.0);
        let traj = run(&scenario).unwrap();
        let snap = &traj.snapshots[traj.snapshots.len() / 2];
        let e = energy(&scenario, snap, None, 0, 0).unwrap();
        let reference = 4.0 * std::f64::consts::PI * reduced_energy(snap);
        assert!(
            (e - reference).abs() / reference < 5e-3,
            "stencil energy {e} vs reduced {reference}"
        );
    }

    #[test]
    fn energy_exact_on_static_state() {
        // On the t = 0 snapshot ∂_tφ = 0 holds exactly through the window
        // (time-symmetric scheme), so the stencil path and a direct
        // trapezoid quadrature agree to roundoff.
        let scenario = Scenario::linear(0.1, 0.02, 3.0);
        let traj = run(&scenario).unwrap();
        let snap = &traj.snapshots[0];
        let e = energy(&scenario, snap, None, 0, 0).unwrap();
        let dr_row = snap.dphi_dr();
        let support = snap.support_radius();
        let integrand: Vec<f64> = (0..snap.n())
            .map(|j| {
                if j == 0 || j + 1 == snap.n() || snap.r_at(j) > support {
                    0.0
                } else {
                    snap.dphi_dt[j] * snap.dphi_dt[j] + dr_row[j] * dr_row[j]
                }
            })
            .collect();
        let oracle = radial_integral(&integrand, snap.dr, snap.r_first);
        assert!(
            (e - oracle).abs() / oracle < 1e-10,
            "stencil {e} vs direct quadrature {oracle}"
        );
    }

    #[test]
    fn energy_ordering_by_index_sets() {
        let scenario = Scenario::model(1.0, 0.05, 0.05, 3.0);
        let traj = run(&scenario).unwrap();
        let snap = traj.last();
        let e00 = energy(&scenario, snap, None, 0, 0).unwrap();
        let e01 = energy(&scenario, snap, None, 0, 1).unwrap();
        let e11 = energy(&scenario, snap, None, 1, 1).unwrap();
        assert!(e00 >= 0.0);
        assert!(e01 >= e00);
        assert!(e11 >= e01);
    }

    #[test]
    fn linear_weighted_energy_constant() {
        // Stencil-based energy carries O(dr²) wobble on top of the scheme's
        // conservation; the tight 0.1% drift bound is checked on the reduced
        // energy in the solver tests.
        let scenario = Scenario::linear(0.1, 0.02, 10.0);
        let traj = run(&scenario).unwrap();
        let e0 = energy(&scenario, &traj.snapshots[1], None, 0, 0).unwrap();
        let e1 = energy(&scenario, traj.last(), None, 0, 0).unwrap();
        assert!(
            (e1 - e0).abs() / e0 < 2e-3,
            "drift {}",
            (e1 - e0).abs() / e0
        );
    }

    #[test]
    fn energy_record_shape() {
        let scenario = Scenario::model(1.0, 0.05, 0.05, 2.0);
        let traj = run(&scenario).unwrap();
        let rec = energy_record(&scenario, traj.last(), None, 2).unwrap();
        // (k, i) pairs with k + i <= 2, lexicographic.
        let pairs: Vec<(usize, usize)> = rec.weighted.iter().map(|e| (e.0, e.1)).collect();
        assert_eq!(pairs, vec![(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0)]);
        assert!(rec.weighted.iter().all(|e| e.2 >= 0.0));
        assert_eq!(rec.e_n.len(), 3);
        assert!(rec.e_n[1] >= rec.e_n[0]);
    }

    #[test]
    fn gronwall_oracle_values() {
        assert_eq!(gronwall_oracle(1.0, 0.5, 0.0, 0.1, 100.0), 4.5);
        let b = gronwall_oracle(1.0, 0.0, 1.0, 0.1, 3.0);
        assert!((b - 4.0 * 4.0_f64.powf(0.2)).abs() < 1e-12);
    }

    #[test]
    fn gronwall_synthetic_families() {
        // E(t) = E0 (1+t)^{βε} with β <= B satisfies the hypothesis (A = 0
        // needs a margin: 4E(0) covers the growth up to the oracle bound).
        let epsilon = 0.05;
        let b = 2.0;
        for beta in [0.0, 0.5, 1.0, 2.0] {
            let samples: Vec<(f64, f64)> = (0..400)
                .map(|k| {
                    let t = k as f64 * 0.25;
                    (t, 1.5 * (1.0 + t).powf(beta * epsilon))
                })
                .collect();
            if gronwall_hypothesis_holds(&samples, 0.0, b, epsilon) {
                for &(t, e) in &samples {
                    let bound = gronwall_oracle(1.5, 0.0, b, epsilon, t);
                    assert!(e <= bound, "E({t}) = {e} > bound {bound}");
                }
            }
        }
    }

    #[test]
    fn convexity_inequality() {
        for (a, b) in [(0.1, 3.0), (2.0, 2.0), (1e-6, 1e3), (7.3, 0.2)] {
            for nu in [0.1, 0.5, 0.9] {
                assert!(weighted_gm_bound(a, b, nu) <= a + b);
            }
        }
    }
}
