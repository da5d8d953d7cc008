//! Decay-rate and energy-growth fits over trajectory output.

use super::StencilWindow;
use crate::eikonal::EikonalFields;
use crate::error::{Error, Result};
use crate::grid::VectorFieldId;
use crate::reports::{fit_power_law, DecayFitReport};
use crate::solver::Trajectory;

/// What to fit against (1 + t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayQuantity {
    SupPhi,
    SupDPhi,
    SupD2Phi,
    SupZPhi,
    /// sup |∂φ| (1 + |ρ|)^ν — the ρ-decay divided out.
    SupDPhiRhoWeighted {
        nu: f64,
    },
    /// sup |∂²φ| (1 + |ρ|)^{1+ν} / ρ_q.
    SupD2PhiRhoWeighted {
        nu: f64,
    },
}

impl DecayQuantity {
    pub fn label(&self) -> String {
        match self {
            DecayQuantity::SupPhi => "sup|phi|".into(),
            DecayQuantity::SupDPhi => "sup|dphi|".into(),
            DecayQuantity::SupD2Phi => "sup|d2phi|".into(),
            DecayQuantity::SupZPhi => "sup|Zphi|".into(),
            DecayQuantity::SupDPhiRhoWeighted { nu } => format!("sup|dphi|(1+|rho|)^{nu}"),
            DecayQuantity::SupD2PhiRhoWeighted { nu } => {
                format!("sup|d2phi|(1+|rho|)^(1+{nu})/rho_q")
            }
        }
    }

    fn needs_rho(&self) -> bool {
        matches!(
            self,
            DecayQuantity::SupDPhiRhoWeighted { .. } | DecayQuantity::SupD2PhiRhoWeighted { .. }
        )
    }
}

/// Fit sup-norm decay over snapshots inside [window.0, window.1].
/// `near_cone_only` restricts the sup to |ρ| <= 5 (ρ falls back to r - t
/// when no eikonal fields are supplied and the quantity allows it).
pub fn decay_fit(
    traj: &Trajectory,
    fields: Option<&EikonalFields>,
    quantity: DecayQuantity,
    window: (f64, f64),
    near_cone_only: bool,
) -> Result<DecayFitReport> {
    if quantity.needs_rho() && fields.is_none() {
        return Err(Error::Unsupported(format!(
            "{} needs eikonal fields",
            quantity.label()
        )));
    }
    let mut samples = Vec::new();
    for (k, snap) in traj.snapshots.iter().enumerate() {
        if snap.t < window.0 || snap.t > window.1 {
            continue;
        }
        let rho_row: Option<&[f64]> = fields.map(|f| f.rho[k].as_slice());
        let rho_at = |j: usize| -> f64 {
            match rho_row {
                Some(r) if r[j].is_finite() => r[j],
                _ => snap.r_at(j) - snap.t,
            }
        };
        // Sups stop at the support radius; beyond it only the weighted
        // stencil precursor lives.
        let support = snap.support_radius();

        let mut sup = 0.0_f64;
        match quantity {
            DecayQuantity::SupPhi => {
                for j in 0..snap.n() {
                    if snap.r_at(j) > support || (near_cone_only && rho_at(j).abs() > 5.0) {
                        continue;
                    }
                    sup = sup.max(snap.phi[j].abs());
                }
            }
            DecayQuantity::SupDPhi | DecayQuantity::SupDPhiRhoWeighted { .. } => {
                let dr_row = snap.dphi_dr();
                for j in 0..snap.n() {
                    let rho = rho_at(j);
                    if snap.r_at(j) > support || (near_cone_only && rho.abs() > 5.0) {
                        continue;
                    }
                    let g = (dr_row[j] * dr_row[j] + snap.dphi_dt[j] * snap.dphi_dt[j]).sqrt();
                    let v = match quantity {
                        DecayQuantity::SupDPhiRhoWeighted { nu } => g * (1.0 + rho.abs()).powf(nu),
                        _ => g,
                    };
                    sup = sup.max(v);
                }
            }
            DecayQuantity::SupD2Phi | DecayQuantity::SupD2PhiRhoWeighted { .. } => {
                let window_st = StencilWindow::build(&traj.scenario, snap, 2)?;
                let tt = window_st.apply_word(&[VectorFieldId::Dt, VectorFieldId::Dt])?;
                let tr = window_st.apply_word(&[VectorFieldId::Dt, VectorFieldId::Dr])?;
                let rr = window_st.apply_word(&[VectorFieldId::Dr, VectorFieldId::Dr])?;
                for j in 0..snap.n() {
                    if !(tt[j].is_finite() && tr[j].is_finite() && rr[j].is_finite()) {
                        continue;
                    }
                    let rho = rho_at(j);
                    if snap.r_at(j) > support || (near_cone_only && rho.abs() > 5.0) {
                        continue;
                    }
                    let h2 = (tt[j] * tt[j] + 2.0 * tr[j] * tr[j] + rr[j] * rr[j]).sqrt();
                    let v = match quantity {
                        DecayQuantity::SupD2PhiRhoWeighted { nu } => {
                            let rq = fields
                                .map(|f| f.rho_q_factor[k][j])
                                .filter(|x| x.is_finite() && *x > 0.0)
                                .unwrap_or(1.0);
                            h2 * (1.0 + rho.abs()).powf(1.0 + nu) / rq
                        }
                        _ => h2,
                    };
                    sup = sup.max(v);
                }
            }
            DecayQuantity::SupZPhi => {
                let window_st = StencilWindow::build(&traj.scenario, snap, 1)?;
                let rows: Vec<Vec<f64>> = [
                    VectorFieldId::S,
                    VectorFieldId::K,
                    VectorFieldId::Dt,
                    VectorFieldId::Dr,
                ]
                .iter()
                .map(|z| window_st.apply_word(&[*z]))
                .collect::<Result<_>>()?;
                for j in 0..snap.n() {
                    let rho = rho_at(j);
                    if snap.r_at(j) > support || (near_cone_only && rho.abs() > 5.0) {
                        continue;
                    }
                    for row in &rows {
                        if row[j].is_finite() {
                            sup = sup.max(row[j].abs());
                        }
                    }
                }
            }
        }
        samples.push((snap.t, sup));
    }
    if samples.len() < 10 {
        return Err(Error::TooFewSamples {
            needed: 10,
            have: samples.len(),
        });
    }
    let mut fit = fit_power_law(&quantity.label(), &samples);
    if near_cone_only {
        fit.quantity = format!("{} (|rho|<=5)", fit.quantity);
    }
    Ok(fit)
}

/// Fit E(t) = E(0)(1+t)^γ over an energy series; returns (γ, rms residual).
pub fn growth_exponent(series: &[(f64, f64)]) -> Result<(f64, f64)> {
    if series.len() < 10 {
        return Err(Error::TooFewSamples {
            needed: 10,
            have: series.len(),
        });
    }
    if series.iter().any(|(_, e)| *e <= 0.0) {
        return Err(Error::InvariantViolation(
            "non-positive energy in growth fit".into(),
        ));
    }
    let fit = fit_power_law("energy", series);
    Ok((fit.exponent.unwrap_or(0.0), fit.residual))
}
