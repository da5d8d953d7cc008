//! Run and sweep configuration: one TOML document per run, no environment
//! lookups, everything echoed back into the emitted artifacts.

use crate::error::{Error, Result};
use crate::solver::Scenario;
use serde::{Deserialize, Serialize};
use std::path::Path;

fn default_nu() -> f64 {
    0.9
}

/// Characteristic-tracing controls.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EikonalConfig {
    /// ν used in the ρ_q bound checks (below the measured decay order).
    #[serde(default = "default_nu")]
    pub nu: f64,
}

impl Default for EikonalConfig {
    fn default() -> Self {
        EikonalConfig { nu: default_nu() }
    }
}

fn default_kappa() -> f64 {
    2.0
}

fn default_nu_prime() -> f64 {
    0.5
}

fn default_energy_order() -> usize {
    2
}

/// Diagnostics stage controls.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_nu_prime")]
    pub nu_prime: f64,
    /// Inequality ids: energy_weighted, poincare_32, klainerman_sobolev,
    /// hormander, hormander_cor.
    #[serde(default)]
    pub inequalities: Vec<String>,
    /// Fit quantity ids: sup_phi, sup_dphi, sup_d2phi, sup_zphi,
    /// sup_dphi_rho_weighted, sup_d2phi_rho_weighted; append `_near_cone`
    /// to restrict the sup to |ρ| <= 5.
    #[serde(default)]
    pub fit_quantities: Vec<String>,
    /// Fit window; defaults to [t_end/10, t_end].
    #[serde(default)]
    pub fit_window: Option<(f64, f64)>,
    /// N for the unweighted E_N growth series (<= 3).
    #[serde(default = "default_energy_order")]
    pub energy_order: usize,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            kappa: default_kappa(),
            nu_prime: default_nu_prime(),
            inequalities: Vec::new(),
            fit_quantities: Vec::new(),
            fit_window: None,
            energy_order: default_energy_order(),
        }
    }
}

/// Sweep controls (present only for `nullcone sweep`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub epsilons: Vec<f64>,
    #[serde(default = "default_parallel")]
    pub parallel: usize,
}

fn default_parallel() -> usize {
    1
}

/// A full run description as parsed from one TOML document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub eikonal: Option<EikonalConfig>,
    #[serde(default)]
    pub diagnostics: Option<DiagnosticsConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    /// Output directory; the CLI --out flag overrides it.
    #[serde(default)]
    pub out_dir: Option<String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let config: RunConfig = toml::from_str(text).map_err(|e| Error::Config(format!("{e}")))?;
        config.scenario.validate()?;
        if let Some(d) = &config.diagnostics {
            if d.energy_order > 3 {
                return Err(Error::Config(format!(
                    "diagnostics.energy_order = {} exceeds the cap 3",
                    d.energy_order
                )));
            }
            for id in &d.inequalities {
                if !KNOWN_INEQUALITIES.contains(&id.as_str()) {
                    return Err(Error::Config(format!(
                        "unknown inequality id '{id}' (known: {KNOWN_INEQUALITIES:?})"
                    )));
                }
            }
            for q in &d.fit_quantities {
                parse_fit_quantity(q)?;
            }
        }
        if let Some(s) = &config.sweep {
            if s.epsilons.is_empty() {
                return Err(Error::Config("sweep.epsilons is empty".into()));
            }
            if s.epsilons.iter().any(|e| *e <= 0.0) {
                return Err(Error::Config("sweep.epsilons must be positive".into()));
            }
            let mut sorted = s.epsilons.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Config("sweep.epsilons must be distinct".into()));
            }
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }
}

pub const KNOWN_INEQUALITIES: [&str; 5] = [
    "energy_weighted",
    "poincare_32",
    "klainerman_sobolev",
    "hormander",
    "hormander_cor",
];

/// (quantity, near_cone) from a config id.
pub fn parse_fit_quantity(id: &str) -> Result<(crate::diagnostics::DecayQuantity, bool)> {
    use crate::diagnostics::DecayQuantity as Q;
    let (base, near) = match id.strip_suffix("_near_cone") {
        Some(b) => (b, true),
        None => (id, false),
    };
    let q = match base {
        "sup_phi" => Q::SupPhi,
        "sup_dphi" => Q::SupDPhi,
        "sup_d2phi" => Q::SupD2Phi,
        "sup_zphi" => Q::SupZPhi,
        "sup_dphi_rho_weighted" => Q::SupDPhiRhoWeighted { nu: 0.9 },
        "sup_d2phi_rho_weighted" => Q::SupD2PhiRhoWeighted { nu: 0.9 },
        _ => {
            return Err(Error::Config(format!("unknown fit quantity '{id}'")));
        }
    };
    Ok((q, near))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[scenario]
epsilon = 0.01
r_max = 13.0
dr = 0.05
cfl = 0.45
t_end = 10.0
output_interval = 1.0
blowup_factor = 1000.0
dt_min = 1e-7

[scenario.nonlinearity]
kind = "model"
c1 = 1.0

[scenario.profile]
kind = "poly_bump"
"#;

    #[test]
    fn minimal_config_parses() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.scenario.epsilon, 0.01);
        assert!(c.eikonal.is_none());
        assert!(c.sweep.is_none());
    }

    #[test]
    fn negative_dr_names_field() {
        let text = MINIMAL.replace("dr = 0.05", "dr = -0.05");
        let err = RunConfig::parse(&text).unwrap_err();
        assert!(format!("{err}").contains("dr"), "{err}");
    }

    #[test]
    fn sweep_validation() {
        let with_sweep = format!("{MINIMAL}\n[sweep]\nepsilons = [0.02, 0.01]\n");
        assert!(RunConfig::parse(&with_sweep).is_ok());
        let empty = format!("{MINIMAL}\n[sweep]\nepsilons = []\n");
        assert!(RunConfig::parse(&empty).is_err());
        let dup = format!("{MINIMAL}\n[sweep]\nepsilons = [0.01, 0.01]\n");
        assert!(RunConfig::parse(&dup).is_err());
    }

    #[test]
    fn unknown_ids_rejected() {
        let text = format!("{MINIMAL}\n[diagnostics]\ninequalities = [\"bogus\"]\n");
        assert!(RunConfig::parse(&text).is_err());
        let text = format!("{MINIMAL}\n[diagnostics]\nfit_quantities = [\"sup_vorticity\"]\n");
        assert!(RunConfig::parse(&text).is_err());
        let text = format!("{MINIMAL}\n[diagnostics]\nfit_quantities = [\"sup_dphi_near_cone\"]\n");
        assert!(RunConfig::parse(&text).is_ok());
    }
}
