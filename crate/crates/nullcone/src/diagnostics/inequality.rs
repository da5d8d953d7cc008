//! Measured inequality checks: the weighted energy estimate, the weighted
//! Poincaré estimate with its constant 32, the Klainerman-Sobolev bound,
//! and the fundamental-solution bound for forced linear runs.

use super::{energy, radial_integral, weight_field, StencilWindow};
use crate::eikonal::EikonalFields;
use crate::error::{Error, Result};
use crate::grid::{self, VectorFieldId};
use crate::reports::InequalityReport;
use crate::solver::{RadialSnapshot, Trajectory};

/// Reference constant for the Klainerman-Sobolev margin checks, pinned as a
/// regression baseline from smooth-bump and small-data model runs (measured
/// minimal constants stay below 1.1; see the acceptance suite).
pub const KS_REFERENCE_CONSTANT: f64 = 4.0;

fn max_metric_derivative(snap: &RadialSnapshot, traj: &Trajectory) -> f64 {
    // |∂H^{αβ}| via the chain rule H' (φ) ∂φ, maximized over components and
    // coordinate directions.
    let hp = |phi: f64| traj.scenario.nonlinearity.h_tensor_dphi(phi);
    let dr_row = snap.dphi_dr();
    let mut m = 0.0_f64;
    for j in 0..snap.n() {
        let d = hp(snap.phi[j]);
        let comp_max = d.max_abs();
        let grad = (dr_row[j] * dr_row[j] + snap.dphi_dt[j] * snap.dphi_dt[j]).sqrt();
        m = m.max(comp_max * grad);
    }
    m
}

/// The weighted energy inequality for □_g φ = F:
///
/// ```text
/// ∫|∂φ|²w dx <= 4∫_{Σ₀}|∂φ|²w dx + ∫₀ᵗ 4cε/(1+τ) ∫|∂φ|²w dx dτ
///               + (4/cε) ∫₀ᵗ (1+τ)∫|□_gφ|²w dx dτ,
/// ```
///
/// with c = c₁ + κ and c₁ measured from the hypothesis |∂g| <= c₁ε/(1+t).
/// For solver output □_gφ vanishes analytically and the discrete residual
/// is measured into the right side.
pub fn energy_inequality_check(
    traj: &Trajectory,
    fields: &EikonalFields,
    kappa: f64,
    epsilon: f64,
    nu_prime: f64,
) -> Result<InequalityReport> {
    let mut report = InequalityReport::new("energy_weighted");
    let nk = traj.snapshots.len();
    if nk == 0 {
        return Err(Error::EmptyValidRegion("no snapshots".into()));
    }

    // Hypothesis side: measured c₁ and the ρ-slope condition.
    let mut c1 = 0.0_f64;
    for snap in &traj.snapshots {
        c1 = c1.max(max_metric_derivative(snap, traj) * (1.0 + snap.t) / epsilon);
    }
    let c = c1 + kappa;
    let use_box_term = c * epsilon > 1e-12;
    if !use_box_term {
        report
            .flags
            .push("c*epsilon = 0: forcing-residual term omitted from the right side".into());
    }
    report.flags.push(format!("measured c1 = {c1:.6}"));

    let mut slope_margin = f64::INFINITY;
    for (k, snap) in traj.snapshots.iter().enumerate() {
        if snap.t <= 1.0 || kappa == 0.0 {
            continue;
        }
        for j in 1..snap.n() - 1 {
            if !fields.valid[k][j] {
                continue;
            }
            let h = traj.scenario.nonlinearity.h_tensor(snap.phi[j]);
            let g00 = -1.0 + h.get(0, 0);
            let grr = 1.0 + h.get(3, 3);
            let hll = crate::frame::contract(
                &h,
                &crate::frame::FourVector([1.0, 0.0, 0.0, 1.0]),
                &crate::frame::FourVector([1.0, 0.0, 0.0, 1.0]),
            );
            let rho_t = fields.drho_dt(k, j, hll);
            let rho_r = fields.drho_dr(k, j, hll);
            if !(rho_t < 0.0) {
                slope_margin = f64::NEG_INFINITY;
                continue;
            }
            let rho = fields.rho[k][j];
            let lhs = (g00 * rho_t * rho_t + grr * rho_r * rho_r)
                / (rho_t * (1.0 + rho.abs()).powf(1.0 + nu_prime));
            let rhs = -(1.0 / (kappa * nu_prime)) / ((1.0 + snap.t) * (1.0 + snap.t).ln());
            slope_margin = slope_margin.min(lhs - rhs);
        }
    }
    if kappa > 0.0 {
        if slope_margin < 0.0 {
            report.flags.push(format!(
                "rho-slope hypothesis violated: min margin {slope_margin:.3e}"
            ));
        } else {
            report
                .flags
                .push(format!("rho-slope hypothesis margin {slope_margin:.3e}"));
        }
    }

    // Per-snapshot energies and wave-operator residuals.
    let mut e_w = Vec::with_capacity(nk);
    let mut box_sq = Vec::with_capacity(nk);
    for (k, snap) in traj.snapshots.iter().enumerate() {
        let w = weight_field(snap, &fields.rho[k], kappa, epsilon, nu_prime)?;
        e_w.push(energy(&traj.scenario, snap, Some(&w), 0, 0)?);

        let window = StencilWindow::build(&traj.scenario, snap, 2)?;
        let tt = window.apply_word(&[VectorFieldId::Dt, VectorFieldId::Dt])?;
        let rr = window.apply_word(&[VectorFieldId::Dr, VectorFieldId::Dr])?;
        let dr_row = snap.dphi_dr();
        let mut integrand = vec![0.0; snap.n()];
        let support = snap.support_radius();
        for j in 1..snap.n() - 1 {
            if !(tt[j].is_finite() && rr[j].is_finite()) {
                continue;
            }
            let r = snap.r_at(j);
            if r < snap.dr * 0.5 || r > support {
                continue;
            }
            let h = traj.scenario.nonlinearity.h_tensor(snap.phi[j]);
            let g00 = -1.0 + h.get(0, 0);
            let grr = 1.0 + h.get(3, 3);
            let box_g = g00 * tt[j] + grr * (rr[j] + 2.0 * dr_row[j] / r);
            integrand[j] = box_g * box_g * w.values[j];
        }
        box_sq.push(radial_integral(&integrand, snap.dr, snap.r_first));
    }

    // Cumulative trapezoid right side.
    let times: Vec<f64> = traj.snapshots.iter().map(|s| s.t).collect();
    let mut energy_int = 0.0;
    let mut box_int = 0.0;
    for k in 0..nk {
        if k > 0 {
            let dt = times[k] - times[k - 1];
            let f0 = 4.0 * c * epsilon / (1.0 + times[k - 1]) * e_w[k - 1];
            let f1 = 4.0 * c * epsilon / (1.0 + times[k]) * e_w[k];
            energy_int += 0.5 * dt * (f0 + f1);
            let g0 = (1.0 + times[k - 1]) * box_sq[k - 1];
            let g1 = (1.0 + times[k]) * box_sq[k];
            box_int += 0.5 * dt * (g0 + g1);
        }
        let mut rhs = 4.0 * e_w[0] + energy_int;
        if use_box_term {
            rhs += 4.0 / (c * epsilon) * box_int;
        }
        report.push(times[k], e_w[k], rhs);
    }
    Ok(report)
}

/// The weighted Poincaré estimate with the displayed constant 32:
///
/// ```text
/// ∫(|φ|/(1+|ρ|) ∂ρ/∂r)² w dx + ∫(|φ|/(1+|r-t|))² w dx <= 32 ∫|∂φ|² w dx
/// ```
///
/// for fields supported in r <= t + 1, with ∂ρ/∂r = (1 - H_LL/4) ρ_q.
pub fn poincare_check(
    traj: &Trajectory,
    fields: &EikonalFields,
    kappa: f64,
    epsilon: f64,
    nu_prime: f64,
    c2_measured: f64,
) -> Result<InequalityReport> {
    let mut report = InequalityReport::new("poincare_32");
    if kappa <= 2.0 * c2_measured / nu_prime {
        report.flags.push(format!(
            "hypothesis kappa > 2c2/nu' fails: kappa = {kappa}, 2c2/nu' = {}",
            2.0 * c2_measured / nu_prime
        ));
    }
    for (k, snap) in traj.snapshots.iter().enumerate() {
        let w = weight_field(snap, &fields.rho[k], kappa, epsilon, nu_prime)?;
        let dr_row = snap.dphi_dr();
        let n = snap.n();
        let mut lhs = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let support = snap.support_radius();
        for j in 0..n {
            if !fields.valid[k][j] || snap.r_at(j) > support {
                continue;
            }
            let r = snap.r_at(j);
            let rho = fields.rho[k][j];
            let h = traj.scenario.nonlinearity.h_tensor(snap.phi[j]);
            let hll = crate::frame::contract(
                &h,
                &crate::frame::FourVector([1.0, 0.0, 0.0, 1.0]),
                &crate::frame::FourVector([1.0, 0.0, 0.0, 1.0]),
            );
            let drho_dr = fields.drho_dr(k, j, hll);
            let a = snap.phi[j] / (1.0 + rho.abs()) * drho_dr;
            let b = snap.phi[j] / (1.0 + (r - snap.t).abs());
            lhs[j] = (a * a + b * b) * w.values[j];
            rhs[j] = (snap.dphi_dt[j] * snap.dphi_dt[j] + dr_row[j] * dr_row[j]) * w.values[j];
        }
        let lhs_v = radial_integral(&lhs, snap.dr, snap.r_first);
        let rhs_v = 32.0 * radial_integral(&rhs, snap.dr, snap.r_first);
        report.push(snap.t, lhs_v, rhs_v);
    }
    Ok(report)
}

/// Pointwise decay from L² norms of vector-field derivatives:
///
///   (1+t+r)(1+|t-r|)^{1/2} |φ| <= C Σ_{|I|<=2} ||Z^Iφ||_{L²}.
///
/// The report's RHS uses the pinned reference constant; min_constant is the
/// measured minimal C.
pub fn klainerman_sobolev_check(traj: &Trajectory) -> Result<InequalityReport> {
    let mut report = InequalityReport::new("klainerman_sobolev");
    for snap in &traj.snapshots {
        let window = StencilWindow::build(&traj.scenario, snap, 2)?;
        let support = snap.support_radius();
        let mut norm_sum = 0.0;
        for word in grid::field_words(0, 2) {
            let row = window.apply_word(&word)?;
            let sq: Vec<f64> = row
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    if v.is_finite() && snap.r_at(j) <= support {
                        v * v
                    } else {
                        0.0
                    }
                })
                .collect();
            norm_sum += radial_integral(&sq, snap.dr, snap.r_first).sqrt();
        }
        let mut sup = 0.0_f64;
        for j in 0..snap.n() {
            let r = snap.r_at(j);
            if r > support {
                continue;
            }
            let v = (1.0 + snap.t + r) * (1.0 + (snap.t - r).abs()).sqrt() * snap.phi[j].abs();
            sup = sup.max(v);
        }
        report.push(snap.t, sup, KS_REFERENCE_CONSTANT * norm_sum);
    }
    Ok(report)
}

/// Nested centered differences of an analytic f(t, r) under a stencil word;
/// h is tiny relative to the forcing scale, so truncation is negligible.
fn apply_word_analytic(
    f: &dyn Fn(f64, f64) -> f64,
    word: &[VectorFieldId],
    t: f64,
    r: f64,
    h: f64,
) -> f64 {
    if word.is_empty() {
        return f(t, r);
    }
    let rest = &word[1..];
    let dt = (apply_word_analytic(f, rest, t + h, r, h)
        - apply_word_analytic(f, rest, t - h, r, h))
        / (2.0 * h);
    let dr = (apply_word_analytic(f, rest, t, r + h, h)
        - apply_word_analytic(f, rest, t, r - h, h))
        / (2.0 * h);
    match word[0] {
        VectorFieldId::S => t * dt + r * dr,
        VectorFieldId::K => r * dt + t * dr,
        VectorFieldId::Dt => dt,
        VectorFieldId::Dr => dr,
    }
}

fn hormander_rhs_series(traj: &Trajectory) -> Result<Vec<(f64, f64)>> {
    let forcing = traj.scenario.forcing.ok_or_else(|| {
        Error::Unsupported("fundamental-solution check needs a forced run".into())
    })?;
    let f = move |t: f64, r: f64| forcing.eval(t, r);
    let h = 1e-3;

    // g(τ) = Σ_{|I|<=2} ∫ |Z^I F(τ, y)| / (1+τ+y) 4π y² dy on a fine τ-grid
    // spanning the forcing support.
    let n_tau = 200;
    let n_y = 200;
    let tau0 = forcing.t_on;
    let tau1 = forcing.t_off;
    let dtau = (tau1 - tau0) / n_tau as f64;
    let dy = forcing.r_width / n_y as f64;
    let words = grid::field_words(0, 2);
    let mut g = vec![0.0; n_tau];
    for (it, gv) in g.iter_mut().enumerate() {
        let tau = tau0 + (it as f64 + 0.5) * dtau;
        let mut total = 0.0;
        for iy in 0..n_y {
            let y = (iy as f64 + 0.5) * dy;
            let mut word_sum = 0.0;
            for word in &words {
                word_sum += apply_word_analytic(&f, word, tau, y, h).abs();
            }
            total += word_sum / (1.0 + tau + y) * 4.0 * std::f64::consts::PI * y * y * dy;
        }
        *gv = total;
    }

    // Cumulative ∫₀ᵗ g at the snapshot times.
    let mut out = Vec::with_capacity(traj.snapshots.len());
    for snap in &traj.snapshots {
        let t = snap.t;
        let mut acc = 0.0;
        for (it, gv) in g.iter().enumerate() {
            let tau_hi = tau0 + (it as f64 + 1.0) * dtau;
            if t >= tau_hi {
                acc += gv * dtau;
            } else {
                let tau_lo = tau0 + it as f64 * dtau;
                if t > tau_lo {
                    acc += gv * (t - tau_lo);
                }
                break;
            }
        }
        out.push((t, acc));
    }
    Ok(out)
}

/// |w(t,x)|(1+t+|x|) <= C Σ_{|I|<=2} ∫₀ᵗ∫ |Z^I□w| / (1+τ+|y|) dy dτ for
/// forced runs with vanishing data; □w = F is analytic, so the right side
/// is a space-time quadrature of closed-form derivatives.
pub fn hormander_check(traj: &Trajectory) -> Result<InequalityReport> {
    if traj.scenario.epsilon != 0.0 {
        return Err(Error::Unsupported(
            "nonzero initial data: route through hormander_corollary_check, \
             which adds the initial-data L2 term"
                .into(),
        ));
    }
    let rhs = hormander_rhs_series(traj)?;
    let mut report = InequalityReport::new("hormander");
    for (snap, (t, rhs_v)) in traj.snapshots.iter().zip(rhs) {
        let support = snap.support_radius();
        let mut sup = 0.0_f64;
        for j in 0..snap.n() {
            if snap.r_at(j) > support {
                continue;
            }
            sup = sup.max((1.0 + t + snap.r_at(j)) * snap.phi[j].abs());
        }
        report.push(t, sup, rhs_v);
    }
    Ok(report)
}

/// The corollary variant for compactly supported nonzero data: the right
/// side gains Σ_{|I|<=2} ||∂Z^Iφ(0,·)||_{L²}.
pub fn hormander_corollary_check(traj: &Trajectory) -> Result<InequalityReport> {
    let rhs = hormander_rhs_series(traj)?;
    let first = &traj.snapshots[0];
    let window = StencilWindow::build(&traj.scenario, first, 3)?;
    let mut data_term = 0.0;
    let support = first.support_radius();
    for word in grid::field_words(0, 2) {
        let mut sq = vec![0.0; first.n()];
        for outer in [VectorFieldId::Dt, VectorFieldId::Dr] {
            let mut w = vec![outer];
            w.extend_from_slice(&word);
            let row = window.apply_word(&w)?;
            for j in 0..first.n() {
                if row[j].is_finite() && first.r_at(j) <= support {
                    sq[j] += row[j] * row[j];
                }
            }
        }
        data_term += radial_integral(&sq, first.dr, first.r_first).sqrt();
    }
    let mut report = InequalityReport::new("hormander_cor");
    report
        .flags
        .push(format!("initial-data L2 term = {data_term:.6e}"));
    for (snap, (t, rhs_v)) in traj.snapshots.iter().zip(rhs) {
        let support = snap.support_radius();
        let mut sup = 0.0_f64;
        for j in 0..snap.n() {
            if snap.r_at(j) > support {
                continue;
            }
            sup = sup.max((1.0 + t + snap.r_at(j)) * snap.phi[j].abs());
        }
        report.push(t, sup, rhs_v + data_term);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eikonal::{rho_fields, seed_labels, trace_characteristics};
    use crate::solver::{run, Forcing, Scenario};

    fn flat_fields(traj: &Trajectory) -> EikonalFields {
        let bundle =
            trace_characteristics(traj, &seed_labels(traj.scenario.t_end, traj.scenario.dr))
                .unwrap();
        rho_fields(&bundle, traj).unwrap()
    }

    #[test]
    fn linear_energy_inequality_unweighted() {
        let scenario = Scenario::linear(0.1, 0.05, 10.0);
        let traj = run(&scenario).unwrap();
        let fields = flat_fields(&traj);
        let report = energy_inequality_check(&traj, &fields, 0.0, 0.1, 0.5).unwrap();
        assert!(
            report.min_margin() >= 0.0,
            "margin {} at linear run",
            report.min_margin()
        );
    }

    #[test]
    fn poincare_static_bump() {
        // At t = 0 with w ≡ 1 and ρ = r - t the inequality reduces to a
        // direct quadrature check with constant 32.
        let scenario = Scenario::linear(0.1, 0.01, 2.0);
        let traj = run(&scenario).unwrap();
        let fields = flat_fields(&traj);
        let report = poincare_check(&traj, &fields, 0.0, 0.1, 0.5, 0.0).unwrap();
        assert!(report.min_margin() >= 0.0, "margin {}", report.min_margin());
        assert!(report.min_constant <= 1.0, "C/32 = {}", report.min_constant);
    }

    #[test]
    fn ks_constant_zero_field() {
        let scenario = Scenario::linear(0.1, 0.05, 3.0);
        let mut traj = run(&scenario).unwrap();
        for snap in &mut traj.snapshots {
            snap.phi.iter_mut().for_each(|p| *p = 0.0);
            snap.dphi_dt.iter_mut().for_each(|p| *p = 0.0);
            snap.big_phi.iter_mut().for_each(|p| *p = 0.0);
            snap.dbig_phi_dt.iter_mut().for_each(|p| *p = 0.0);
        }
        let report = klainerman_sobolev_check(&traj).unwrap();
        assert_eq!(report.min_constant, 0.0);
    }

    #[test]
    fn ks_constant_static_bump_refinement() {
        let mut constants = Vec::new();
        for dr in [0.02, 0.01] {
            let scenario = Scenario::linear(0.1, dr, 2.0);
            let traj = run(&scenario).unwrap();
            let report = klainerman_sobolev_check(&traj).unwrap();
            assert!(report.min_margin() >= 0.0);
            constants.push(report.min_constant * KS_REFERENCE_CONSTANT);
        }
        let rel = (constants[0] - constants[1]).abs() / constants[1];
        assert!(rel < 0.10, "KS constants {constants:?} differ by {rel}");
    }

    #[test]
    fn ks_scaling_under_width_change() {
        // Exact λ-invariance of the minimal constant cannot hold under the
        // r <= 1 support constraint: the (1+t+r) offsets and the mixed
        // derivative orders in Σ||Z^Iφ|| scale differently (between λ^{1/2}
        // and λ^{3/2}). The measured ratio for λ = 2 at sub-unit widths is
        // pinned here as a regression bound instead.
        let narrow = Scenario {
            profile: crate::solver::DataProfile::TruncGaussian { width: 0.25 },
            ..Scenario::linear(0.1, 0.005, 2.0)
        };
        let wide = Scenario {
            profile: crate::solver::DataProfile::TruncGaussian { width: 0.5 },
            ..Scenario::linear(0.1, 0.005, 2.0)
        };
        let c_of = |s: &Scenario| {
            let traj = run(s).unwrap();
            let first = Trajectory {
                scenario: s.clone(),
                snapshots: vec![traj.snapshots[0].clone()],
                termination: traj.termination.clone(),
            };
            klainerman_sobolev_check(&first).unwrap().min_constant
        };
        let c1 = c_of(&narrow);
        let c2 = c_of(&wide);
        let ratio = c1 / c2;
        assert!(
            (1.2..=2.2).contains(&ratio),
            "width-halving ratio {ratio} left the measured band"
        );
    }

    #[test]
    fn hormander_requires_zero_data() {
        let scenario = Scenario::linear(0.1, 0.05, 3.0);
        let traj = run(&scenario).unwrap();
        assert!(hormander_check(&traj).is_err());
    }

    #[test]
    fn hormander_forced_bump() {
        let forcing = Forcing {
            amplitude: 0.05,
            t_on: 0.5,
            t_off: 1.5,
            r_width: 1.0,
        };
        let mut constants = Vec::new();
        for dr in [0.04, 0.02] {
            let scenario = Scenario {
                epsilon: 0.0,
                forcing: Some(forcing),
                ..Scenario::linear(1.0, dr, 8.0)
            };
            let traj = run(&scenario).unwrap();
            let report = hormander_check(&traj).unwrap();
            assert!(report.min_constant.is_finite());
            assert!(report.min_constant > 0.0);
            constants.push(report.min_constant);
        }
        let rel = (constants[0] - constants[1]).abs() / constants[1];
        assert!(rel < 0.15, "constants {constants:?} differ by {rel}");
    }

    #[test]
    fn hormander_time_translation() {
        let c_of = |t_on: f64| {
            let scenario = Scenario {
                epsilon: 0.0,
                forcing: Some(Forcing {
                    amplitude: 0.05,
                    t_on,
                    t_off: t_on + 1.0,
                    r_width: 1.0,
                }),
                ..Scenario::linear(1.0, 0.02, 8.0)
            };
            let traj = run(&scenario).unwrap();
            hormander_check(&traj).unwrap().min_constant
        };
        let c1 = c_of(0.5);
        let c2 = c_of(2.5);
        assert!(
            (c1 - c2).abs() / c1 < 0.10,
            "translated constants {c1} vs {c2}"
        );
    }

    #[test]
    fn ks_constant_bounded_on_model_run() {
        // No growth trend in the minimal constant over the run. The
        // measured C(t) in fact decays: the denominator's t-weighted
        // stencil words carry the same secular truncation growth that
        // rules out the high-order energy series, so only the one-sided
        // no-growth statement is checkable at this resolution.
        let scenario = Scenario {
            output_interval: 1.0,
            ..Scenario::model(1.0, 0.01, 0.05, 60.0)
        };
        let traj = run(&scenario).unwrap();
        let rep = klainerman_sobolev_check(&traj).unwrap();
        let series: Vec<(f64, f64)> = rep
            .times
            .iter()
            .zip(rep.lhs.iter().zip(&rep.rhs))
            .filter(|(t, (_, rhs))| **t >= 10.0 && **rhs > 0.0)
            .map(|(t, (lhs, rhs))| (*t, lhs / rhs))
            .collect();
        let fit = crate::reports::fit_power_law("ks_constant", &series);
        let slope = fit.exponent.unwrap();
        assert!(slope <= 0.1, "KS constant grows: trend {slope}");
    }

    #[test]
    fn hormander_corollary_with_data() {
        // Nonzero data routes through the corollary, whose right side adds
        // the initial-data L2 term.
        let scenario = Scenario {
            forcing: Some(Forcing {
                amplitude: 0.05,
                t_on: 0.5,
                t_off: 1.5,
                r_width: 1.0,
            }),
            ..Scenario::linear(0.05, 0.02, 6.0)
        };
        let traj = run(&scenario).unwrap();
        assert!(hormander_check(&traj).is_err());
        let rep = hormander_corollary_check(&traj).unwrap();
        assert!(rep.min_constant.is_finite() && rep.min_constant > 0.0);
        assert!(rep
            .flags
            .iter()
            .any(|f| f.contains("initial-data L2 term")));
        // The data term keeps the right side positive from t = 0 on.
        assert!(rep.rhs.iter().all(|&v| v > 0.0));
    }
}
