//! The reduced near-cone system for Φ = rφ.
//!
//! A quadratic nonlinearity □φ = Σ a_{αβ} ∂^α φ ∂^β φ (□ = -∂_t² + Δ)
//! contracts against ω̂ = (-1, ω) into the coefficient matrix
//! A_mn(ω) = ¼ Σ_{|α|=m, |β|=n} a_{αβ} ω̂^α ω̂^β. Dropping tangential
//! derivatives and substituting the slow time s = ln(p/2) turns the
//! near-cone evolution into
//!
//! ```text
//!     ∂_s ∂_q Φ = 2 A_mn ∂_q^m Φ ∂_q^n Φ,
//! ```
//!
//! which this module integrates per direction in V = ∂_q Φ. A vanishing A
//! is the classical null condition; global-but-growing integration is
//! evidence for the weak null condition; a gradient catastrophe in V is the
//! John-type blow-up, with dV/ds = 2 A₁₁ V² as the exactly solvable case.

use crate::error::{Error, Result};
use serde::Serialize;

/// Derivative multi-index over (t, x, y, z) with total order <= 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DerivIndex {
    pub orders: [u8; 4],
}

impl DerivIndex {
    pub fn order(&self) -> usize {
        self.orders.iter().map(|&o| o as usize).sum()
    }

    /// Parse a string over {t, x, y, z} of length <= 2; empty = no derivative.
    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        if s.len() > 2 {
            return Err(format!("derivative string '{s}' longer than 2"));
        }
        let mut orders = [0u8; 4];
        for ch in s.chars() {
            let i = match ch {
                't' => 0,
                'x' => 1,
                'y' => 2,
                'z' => 3,
                _ => return Err(format!("invalid derivative axis '{ch}' in '{s}'")),
            };
            orders[i] += 1;
        }
        Ok(DerivIndex { orders })
    }

    /// ω̂^α: product of ω̂ = (-1, ω) components over the multi-index.
    pub fn omega_hat_power(&self, omega: [f64; 3]) -> f64 {
        let hat = [-1.0, omega[0], omega[1], omega[2]];
        let mut p = 1.0;
        for (i, &o) in self.orders.iter().enumerate() {
            for _ in 0..o {
                p *= hat[i];
            }
        }
        p
    }
}

/// One quadratic term a ∂^α φ ∂^β φ; kept normalized with |α| <= |β|.
#[derive(Debug, Clone, Copy)]
pub struct QuadraticTerm {
    pub alpha: DerivIndex,
    pub beta: DerivIndex,
    pub coefficient: f64,
}

/// The right-hand side Σ a_{αβ} ∂^α φ ∂^β φ of □φ = ... .
#[derive(Debug, Clone, Default)]
pub struct QuadraticNonlinearity {
    terms: Vec<QuadraticTerm>,
}

impl QuadraticNonlinearity {
    pub fn new() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn push(&mut self, alpha: DerivIndex, beta: DerivIndex, coefficient: f64) {
        let (alpha, beta) = if alpha.order() <= beta.order() {
            (alpha, beta)
        } else {
            (beta, alpha)
        };
        self.terms.push(QuadraticTerm {
            alpha,
            beta,
            coefficient,
        });
    }

    pub fn terms(&self) -> &[QuadraticTerm] {
        &self.terms
    }

    pub fn scale(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coefficient *= lambda;
        }
        out
    }

    /// (∂_t φ)².
    pub fn time_derivative_squared() -> Self {
        let mut nl = Self::new();
        let t = DerivIndex::parse("t").unwrap();
        nl.push(t, t, 1.0);
        nl
    }

    /// The classical null form Q₀ = (∂_t φ)² - Σ_i (∂_i φ)².
    pub fn null_form_q0() -> Self {
        let mut nl = Self::new();
        let t = DerivIndex::parse("t").unwrap();
        nl.push(t, t, 1.0);
        for ax in ["x", "y", "z"] {
            let d = DerivIndex::parse(ax).unwrap();
            nl.push(d, d, -1.0);
        }
        nl
    }

    /// Quadratic part of -∂_t²φ + c(φ)²Δφ = 0 moved to the right side:
    /// □φ = -2c'(0) φ Δφ.
    pub fn model_linearization(c_prime: f64) -> Self {
        let mut nl = Self::new();
        let empty = DerivIndex::parse("").unwrap();
        for ax in ["xx", "yy", "zz"] {
            nl.push(empty, DerivIndex::parse(ax).unwrap(), -2.0 * c_prime);
        }
        nl
    }
}

/// A_mn(ω), populated for 0 <= m <= n <= 2; the lower triangle is zero by
/// the |α| <= |β| normalization.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticCoefficients {
    pub a: [[f64; 3]; 3],
    pub omega: [f64; 3],
}

impl AsymptoticCoefficients {
    pub fn max_abs(&self) -> f64 {
        self.a.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Coefficient of ∂_q^m Φ ∂_q^n Φ (upper triangle holds the sum).
    pub fn coeff(&self, m: usize, n: usize) -> f64 {
        self.a[m][n]
    }
}

/// A_mn = ¼ Σ_{|α|=m, |β|=n} a_{αβ} ω̂^α ω̂^β at a unit direction ω.
pub fn asymptotic_coefficients(
    nl: &QuadraticNonlinearity,
    omega: [f64; 3],
) -> AsymptoticCoefficients {
    let mut a = [[0.0; 3]; 3];
    for term in nl.terms() {
        let m = term.alpha.order();
        let n = term.beta.order();
        a[m][n] += 0.25
            * term.coefficient
            * term.alpha.omega_hat_power(omega)
            * term.beta.omega_hat_power(omega);
    }
    AsymptoticCoefficients { a, omega }
}

/// Deterministic Fibonacci-sphere direction set.
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [rho * phi.cos(), rho * phi.sin(), z]
        })
        .collect()
}

/// Evaluate A over a deterministic ω-grid; the condition holds iff
/// max |A_mn(ω)| stays below 1e-12.
pub fn check_null_condition(nl: &QuadraticNonlinearity, n_directions: usize) -> (bool, f64) {
    let mut max_abs = 0.0_f64;
    for omega in fibonacci_sphere(n_directions.max(6)) {
        max_abs = max_abs.max(asymptotic_coefficients(nl, omega).max_abs());
    }
    (max_abs < 1e-12, max_abs)
}

/// Profile of the reduced system at one slow time: V = ∂_q Φ on a uniform
/// q-grid, with Φ recovered by integration from the vacuum side q >= 1.
#[derive(Debug, Clone)]
pub struct AsymptoticProfile {
    pub q_min: f64,
    pub dq: f64,
    pub s: f64,
    pub v: Vec<f64>,
    pub phi: Vec<f64>,
}

impl AsymptoticProfile {
    /// Build from V = ∂_q Φ samples; Φ is integrated downward from q_max
    /// where compact support forces Φ = 0.
    pub fn from_v(q_min: f64, dq: f64, s: f64, v: Vec<f64>) -> Self {
        let phi = integrate_phi(&v, dq);
        AsymptoticProfile {
            q_min,
            dq,
            s,
            v,
            phi,
        }
    }

    /// Plateau data: V = v0 on [q0, q1] with smooth polynomial shoulders of
    /// width `ramp`, zero outside.
    pub fn plateau(q_min: f64, q_max: f64, n: usize, v0: f64, q0: f64, q1: f64, ramp: f64) -> Self {
        let dq = (q_max - q_min) / (n - 1) as f64;
        let smooth = |u: f64| {
            // C² ramp on [0, 1].
            let u: f64 = u.clamp(0.0, 1.0);
            u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
        };
        let v = (0..n)
            .map(|j| {
                let q = q_min + j as f64 * dq;
                if q <= q0 - ramp || q >= q1 + ramp {
                    0.0
                } else if q < q0 {
                    v0 * smooth((q - (q0 - ramp)) / ramp)
                } else if q > q1 {
                    v0 * smooth(((q1 + ramp) - q) / ramp)
                } else {
                    v0
                }
            })
            .collect();
        Self::from_v(q_min, dq, 0.0, v)
    }

    /// Bump data V(q) = amp (1 - q²)⁴ on |q| < 1.
    pub fn bump(q_min: f64, q_max: f64, n: usize, amp: f64) -> Self {
        let dq = (q_max - q_min) / (n - 1) as f64;
        let v = (0..n)
            .map(|j| {
                let q = q_min + j as f64 * dq;
                if q.abs() < 1.0 {
                    amp * (1.0 - q * q).powi(4)
                } else {
                    0.0
                }
            })
            .collect();
        Self::from_v(q_min, dq, 0.0, v)
    }

    pub fn max_abs_v(&self) -> f64 {
        self.v.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn q_at(&self, j: usize) -> f64 {
        self.q_min + j as f64 * self.dq
    }
}

fn integrate_phi(v: &[f64], dq: f64) -> Vec<f64> {
    // Φ(q) = -∫_q^{q_max} V dq', trapezoid, Φ(q_max) = 0.
    let n = v.len();
    let mut phi = vec![0.0; n];
    for j in (0..n - 1).rev() {
        phi[j] = phi[j + 1] - 0.5 * dq * (v[j] + v[j + 1]);
    }
    phi
}

/// Why an integration stopped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum AsymptoticOutcome {
    /// Reached s_max with max |V| under the threshold.
    Completed,
    /// max |V| crossed the threshold (or the step collapsed, flagged stiff).
    BlowUp {
        s_star: f64,
        q_star: f64,
        stiffness: bool,
    },
}

/// Integration controls for the reduced system.
#[derive(Debug, Clone)]
pub struct IntegrationParams {
    pub s_max: f64,
    pub blowup_threshold: f64,
    /// CFL number against the transport speed of the A_02/A_12 terms.
    pub cfl: f64,
    pub ds_max: f64,
    pub ds_min: f64,
    /// Relative growth allowed per step (controls accuracy near blow-up).
    pub growth_per_step: f64,
    /// Number of evenly spaced profile checkpoints to keep.
    pub checkpoints: usize,
}

impl Default for IntegrationParams {
    fn default() -> Self {
        IntegrationParams {
            s_max: 20.0,
            blowup_threshold: 1e6,
            cfl: 0.5,
            ds_max: 0.01,
            ds_min: 1e-8,
            growth_per_step: 0.02,
            checkpoints: 8,
        }
    }
}

/// Result of integrating one direction.
#[derive(Debug, Clone)]
pub struct AsymptoticRun {
    pub outcome: AsymptoticOutcome,
    pub profiles: Vec<AsymptoticProfile>,
    /// (s, max |V|) at accepted steps.
    pub history: Vec<(f64, f64)>,
}

struct Rhs {
    a: AsymptoticCoefficients,
}

impl Rhs {
    /// dV/ds = 2 [A00 Φ² + A01 Φ V + A11 V² + A02 Φ ∂_qV + A12 V ∂_qV + A22 (∂_qV)²].
    /// The ∂_qV factors of the transport block (A02, A12) are upwinded by the
    /// sign of the advective speed; A22 uses the centered derivative.
    fn eval(&self, v: &[f64], phi: &[f64], dq: f64) -> (Vec<f64>, f64) {
        let n = v.len();
        let a = &self.a;
        let mut out = vec![0.0; n];
        let mut max_speed = 0.0_f64;
        for j in 0..n {
            let jm = j.saturating_sub(1);
            let jp = (j + 1).min(n - 1);
            // ∂_s V = b ∂_q V + (pointwise), b = 2(A02 Φ + A12 V):
            // advective speed is -b; upwind accordingly.
            let b = 2.0 * (a.coeff(0, 2) * phi[j] + a.coeff(1, 2) * v[j]);
            max_speed = max_speed.max(b.abs());
            let (dv, centered) = if j == 0 || j == n - 1 {
                (0.0, 0.0)
            } else {
                let dv = if b > 0.0 {
                    (v[jp] - v[j]) / dq
                } else if b < 0.0 {
                    (v[j] - v[jm]) / dq
                } else {
                    0.0
                };
                (dv, (v[jp] - v[jm]) / (2.0 * dq))
            };
            out[j] = 2.0
                * (a.coeff(0, 0) * phi[j] * phi[j]
                    + a.coeff(0, 1) * phi[j] * v[j]
                    + a.coeff(1, 1) * v[j] * v[j]
                    + a.coeff(2, 2) * centered * centered)
                + b * dv;
        }
        (out, max_speed)
    }
}

/// Advance V = ∂_q Φ in the slow time by explicit midpoint steps with
/// upwinded transport, adaptive step size, and threshold-based blow-up
/// detection. The blow-up slow time is sharpened by extrapolating 1/max|V|,
/// which is linear in s for the Riccati mechanism.
pub fn integrate_asymptotic(
    a: &AsymptoticCoefficients,
    initial: &AsymptoticProfile,
    params: &IntegrationParams,
) -> AsymptoticRun {
    let rhs = Rhs { a: *a };
    let dq = initial.dq;
    let n = initial.v.len();
    let mut v = initial.v.clone();
    let mut s = initial.s;
    let amp_floor = initial.max_abs_v().max(1e-300);

    let mut profiles = vec![AsymptoticProfile::from_v(initial.q_min, dq, s, v.clone())];
    let mut history = vec![(s, initial.max_abs_v())];
    let checkpoint_every = (params.s_max - initial.s) / params.checkpoints.max(1) as f64;
    let mut next_checkpoint = initial.s + checkpoint_every;

    let mut prev_inv_max: Option<(f64, f64)> = None;

    while params.s_max - s > params.ds_min {
        let phi = integrate_phi(&v, dq);
        let (k1, speed1) = rhs.eval(&v, &phi, dq);
        let max_v = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let max_k = k1.iter().fold(0.0_f64, |m, x| m.max(x.abs()));

        // Step-size targets: CFL for transport, bounded relative growth for
        // the Riccati block.
        let mut target = params.ds_max;
        if speed1 > 0.0 {
            target = target.min(params.cfl * dq / speed1);
        }
        if max_k > 0.0 {
            target = target.min(params.growth_per_step * (max_v + amp_floor) / max_k);
        }
        let mut ds = target.min(params.s_max - s);

        loop {
            if ds < params.ds_min {
                let (q_star, _) = argmax_abs(&v, initial.q_min, dq);
                return AsymptoticRun {
                    outcome: AsymptoticOutcome::BlowUp {
                        s_star: s,
                        q_star,
                        stiffness: true,
                    },
                    profiles,
                    history,
                };
            }
            // Explicit midpoint.
            let mut vmid = vec![0.0; n];
            for j in 0..n {
                vmid[j] = v[j] + 0.5 * ds * k1[j];
            }
            let phimid = integrate_phi(&vmid, dq);
            let (k2, speed2) = rhs.eval(&vmid, &phimid, dq);
            // Reject when the midpoint speed violates the CFL for this step.
            if speed2 > 0.0 && ds > params.cfl * dq / speed2 {
                ds *= 0.5;
                continue;
            }
            let mut vnew = vec![0.0; n];
            let mut ok = true;
            for j in 0..n {
                vnew[j] = v[j] + ds * k2[j];
                if !vnew[j].is_finite() {
                    ok = false;
                    break;
                }
            }
            if !ok {
                ds *= 0.5;
                continue;
            }
            v = vnew;
            s += ds;
            break;
        }

        let max_abs = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        history.push((s, max_abs));

        if max_abs > params.blowup_threshold {
            // 1/max|V| is linear in s for the Riccati mechanism; extrapolate
            // its zero from the last accepted step.
            let inv = 1.0 / max_abs;
            let s_star = match prev_inv_max {
                Some((s_prev, inv_prev)) if inv_prev > inv => {
                    let slope = (inv - inv_prev) / (s - s_prev);
                    s - inv / slope
                }
                _ => s,
            };
            let (q_star, _) = argmax_abs(&v, initial.q_min, dq);
            return AsymptoticRun {
                outcome: AsymptoticOutcome::BlowUp {
                    s_star,
                    q_star,
                    stiffness: false,
                },
                profiles,
                history,
            };
        }
        prev_inv_max = Some((s, 1.0 / max_abs.max(1e-300)));

        if s >= next_checkpoint - 1e-12 {
            profiles.push(AsymptoticProfile::from_v(initial.q_min, dq, s, v.clone()));
            next_checkpoint += checkpoint_every;
        }
    }

    profiles.push(AsymptoticProfile::from_v(initial.q_min, dq, s, v.clone()));
    AsymptoticRun {
        outcome: AsymptoticOutcome::Completed,
        profiles,
        history,
    }
}

fn argmax_abs(v: &[f64], q_min: f64, dq: f64) -> (f64, f64) {
    let mut best = (q_min, 0.0_f64);
    for (j, &x) in v.iter().enumerate() {
        if x.abs() > best.1 {
            best = (q_min + j as f64 * dq, x.abs());
        }
    }
    best
}

/// Exact blow-up slow time (measured from s₀) of dV/ds = 2 A₁₁ V²:
/// Δs* = 1/(2 A₁₁ V₀). None when A₁₁ V₀ <= 0 (no blow-up).
pub fn riccati_blowup_oracle(a11: f64, v0_max: f64) -> Option<f64> {
    if a11 * v0_max > 0.0 {
        Some(1.0 / (2.0 * a11 * v0_max))
    } else {
        None
    }
}

/// Verdict of the classifier.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Classification {
    /// A_mn ≡ 0 over the direction grid.
    ClassicalNull { max_abs_a: f64 },
    /// Global integration with bounded growth; the exponent is the slope of
    /// ln max|V| against s (s is logarithmic in t).
    WeakNullEvidence { growth_exponent: f64 },
    /// Some direction develops a gradient catastrophe before s_max.
    BlowUp {
        s_star: f64,
        q_star: f64,
        omega: [f64; 3],
    },
}

/// Classifier controls.
#[derive(Debug, Clone)]
pub struct ClassifyParams {
    pub s_max: f64,
    pub amplitude: f64,
    pub n_directions: usize,
    pub blowup_threshold_factor: f64,
    pub q_points: usize,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        // The John-type lifespan is s* ~ 1/(2 max|A| amplitude); the window
        // must extend past it for the chosen amplitude to witness blow-up.
        ClassifyParams {
            s_max: 40.0,
            amplitude: 0.1,
            n_directions: 16,
            blowup_threshold_factor: 1e6,
            q_points: 401,
        }
    }
}

/// Classify a quadratic nonlinearity: classical null when A vanishes on the
/// sphere, blow-up when any direction's reduced flow breaks down before
/// s_max with small bump data, weak-null evidence otherwise.
pub fn classify(nl: &QuadraticNonlinearity, params: &ClassifyParams) -> Result<Classification> {
    let (is_null, max_abs_a) = check_null_condition(nl, params.n_directions);
    if is_null {
        return Ok(Classification::ClassicalNull { max_abs_a });
    }
    let initial = AsymptoticProfile::bump(-4.0, 1.0, params.q_points, params.amplitude);
    let int_params = IntegrationParams {
        s_max: params.s_max,
        blowup_threshold: params.blowup_threshold_factor * params.amplitude,
        ..Default::default()
    };
    let mut worst_exponent = f64::NEG_INFINITY;
    for omega in fibonacci_sphere(params.n_directions.max(6)) {
        let a = asymptotic_coefficients(nl, omega);
        if a.max_abs() == 0.0 {
            continue;
        }
        let run = integrate_asymptotic(&a, &initial, &int_params);
        match run.outcome {
            AsymptoticOutcome::BlowUp { s_star, q_star, .. } => {
                return Ok(Classification::BlowUp {
                    s_star,
                    q_star,
                    omega,
                });
            }
            AsymptoticOutcome::Completed => {
                let exp = growth_slope(&run.history);
                if exp > worst_exponent {
                    worst_exponent = exp;
                }
            }
        }
    }
    if worst_exponent == f64::NEG_INFINITY {
        // Nonzero max|A| was established, but every sampled direction had
        // A = 0 exactly; no growth to report.
        worst_exponent = 0.0;
    }
    Ok(Classification::WeakNullEvidence {
        growth_exponent: worst_exponent,
    })
}

/// Slope of ln max|V| against s over the later half of the history.
fn growth_slope(history: &[(f64, f64)]) -> f64 {
    if history.len() < 2 {
        return 0.0;
    }
    let s_mid = 0.5 * (history[0].0 + history[history.len() - 1].0);
    let pts: Vec<(f64, f64)> = history
        .iter()
        .filter(|(s, v)| *s >= s_mid && *v > 0.0)
        .map(|&(s, v)| (s, v.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return 0.0;
    }
    (n * sxy - sx * sy) / denom
}

/// Parse a nonlinearity description: one term per line as
/// `alpha,beta,coefficient`, where alpha/beta are strings over {t, x, y, z}
/// of length <= 2 and may be sums joined by '+'; '#' starts a comment.
/// Example: `,xx+yy+zz,-2.0` is -2 φ Δφ.
pub fn parse_nonlinearity(text: &str) -> Result<QuadraticNonlinearity> {
    let mut nl = QuadraticNonlinearity::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(|s| s.trim()).collect();
        if parts.len() != 3 {
            return Err(Error::Grammar {
                line: lineno + 1,
                msg: format!("expected 'alpha,beta,coeff', got '{line}'"),
            });
        }
        let coeff: f64 = parts[2].parse().map_err(|_| Error::Grammar {
            line: lineno + 1,
            msg: format!("bad coefficient '{}'", parts[2]),
        })?;
        let expand = |s: &str| -> std::result::Result<Vec<DerivIndex>, String> {
            if s.is_empty() {
                return Ok(vec![DerivIndex::parse("")?]);
            }
            s.split('+').map(|m| DerivIndex::parse(m.trim())).collect()
        };
        let alphas = expand(parts[0]).map_err(|msg| Error::Grammar {
            line: lineno + 1,
            msg,
        })?;
        let betas = expand(parts[1]).map_err(|msg| Error::Grammar {
            line: lineno + 1,
            msg,
        })?;
        for a in &alphas {
            for b in &betas {
                nl.push(*a, *b, coeff);
            }
        }
    }
    Ok(nl)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients_time_derivative_squared() {
        let nl = QuadraticNonlinearity::time_derivative_squared();
        for omega in fibonacci_sphere(12) {
            let a = asymptotic_coefficients(&nl, omega);
            assert!((a.coeff(1, 1) - 0.25).abs() < 1e-15);
            let mut others = 0.0;
            for m in 0..3 {
                for n in 0..3 {
                    if (m, n) != (1, 1) {
                        others += a.a[m][n].abs();
                    }
                }
            }
            assert_eq!(others, 0.0);
        }
    }

    #[test]
    fn coefficients_null_form_vanish() {
        let nl = QuadraticNonlinearity::null_form_q0();
        let (is_null, max_abs) = check_null_condition(&nl, 32);
        assert!(is_null, "max |A| = {max_abs}");
    }

    #[test]
    fn coefficients_model_linearization() {
        let c_prime = 0.7;
        let nl = QuadraticNonlinearity::model_linearization(c_prime);
        for omega in fibonacci_sphere(8) {
            let a = asymptotic_coefficients(&nl, omega);
            assert!((a.coeff(0, 2) - (-c_prime / 2.0)).abs() < 1e-12);
            let mut others = 0.0;
            for m in 0..3 {
                for n in 0..3 {
                    if (m, n) != (0, 2) {
                        others += a.a[m][n].abs();
                    }
                }
            }
            assert!(others < 1e-15);
        }
    }

    #[test]
    fn zero_nonlinearity_is_null() {
        let (is_null, max_abs) = check_null_condition(&QuadraticNonlinearity::new(), 8);
        assert!(is_null);
        assert_eq!(max_abs, 0.0);
    }

    #[test]
    fn bilinearity_in_coefficients() {
        // Power-of-two scaling is exact in floating point, so the bilinear
        // identity holds with zero tolerance.
        let nl = QuadraticNonlinearity::model_linearization(0.3);
        let scaled = nl.scale(2.0);
        for omega in fibonacci_sphere(6) {
            let a = asymptotic_coefficients(&nl, omega);
            let b = asymptotic_coefficients(&scaled, omega);
            for m in 0..3 {
                for n in 0..3 {
                    assert_eq!(b.a[m][n], 2.0 * a.a[m][n]);
                }
            }
        }
    }

    #[test]
    fn rotation_invariant_families_are_omega_independent() {
        for nl in [
            QuadraticNonlinearity::time_derivative_squared(),
            QuadraticNonlinearity::null_form_q0(),
            QuadraticNonlinearity::model_linearization(1.0),
        ] {
            let dirs = fibonacci_sphere(24);
            let first = asymptotic_coefficients(&nl, dirs[0]);
            for omega in &dirs[1..] {
                let a = asymptotic_coefficients(&nl, *omega);
                for m in 0..3 {
                    for n in 0..3 {
                        assert!((a.a[m][n] - first.a[m][n]).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn free_transport_is_frozen() {
        // A ≡ 0: V is preserved exactly.
        let a = AsymptoticCoefficients {
            a: [[0.0; 3]; 3],
            omega: [0.0, 0.0, 1.0],
        };
        let initial = AsymptoticProfile::bump(-3.0, 1.0, 201, 0.5);
        let params = IntegrationParams {
            s_max: 10.0,
            ds_max: 1e-3,
            ..Default::default()
        };
        let run = integrate_asymptotic(&a, &initial, &params);
        assert_eq!(run.outcome, AsymptoticOutcome::Completed);
        assert!(run.history.len() >= 10_000);
        let last = run.profiles.last().unwrap();
        for j in 0..initial.v.len() {
            assert!((last.v[j] - initial.v[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn riccati_oracle_values() {
        assert!((riccati_blowup_oracle(0.25, 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((riccati_blowup_oracle(0.25, 0.01).unwrap() - 200.0).abs() < 1e-12);
        assert!(riccati_blowup_oracle(0.0, 1.0).is_none());
        assert!(riccati_blowup_oracle(0.25, -1.0).is_none());
    }

    #[test]
    fn riccati_integration_matches_oracle() {
        let mut a = AsymptoticCoefficients {
            a: [[0.0; 3]; 3],
            omega: [0.0, 0.0, 1.0],
        };
        a.a[1][1] = 0.25;
        let v0 = 1.0;
        let initial = AsymptoticProfile::plateau(-3.0, 1.0, 401, v0, -2.0, 0.0, 0.5);
        let params = IntegrationParams {
            s_max: 10.0,
            blowup_threshold: 1e6 * v0,
            ..Default::default()
        };
        let run = integrate_asymptotic(&a, &initial, &params);
        match run.outcome {
            AsymptoticOutcome::BlowUp {
                s_star, stiffness, ..
            } => {
                assert!(!stiffness);
                let oracle = riccati_blowup_oracle(0.25, v0).unwrap();
                assert!(
                    (s_star - oracle).abs() / oracle < 0.01,
                    "s* = {s_star}, oracle = {oracle}"
                );
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn compact_support_preserved() {
        let mut a = AsymptoticCoefficients {
            a: [[0.0; 3]; 3],
            omega: [0.0, 0.0, 1.0],
        };
        a.a[0][2] = -0.5;
        let initial = AsymptoticProfile::bump(-4.0, 1.5, 301, 0.05);
        let params = IntegrationParams {
            s_max: 10.0,
            ..Default::default()
        };
        let run = integrate_asymptotic(&a, &initial, &params);
        let last = run.profiles.last().unwrap();
        for j in 0..last.v.len() {
            if last.q_at(j) >= 1.0 {
                assert_eq!(last.phi[j], 0.0, "Φ leaked past q = 1 at {}", last.q_at(j));
            }
        }
    }

    #[test]
    fn model_family_survives_long_time() {
        // The quasilinear case: global with modest growth for small data.
        let nl = QuadraticNonlinearity::model_linearization(1.0);
        let a = asymptotic_coefficients(&nl, [0.0, 0.0, 1.0]);
        let initial = AsymptoticProfile::bump(-4.0, 1.0, 401, 0.01);
        let params = IntegrationParams {
            s_max: 20.0,
            blowup_threshold: 1e6 * 0.01,
            ..Default::default()
        };
        let run = integrate_asymptotic(&a, &initial, &params);
        assert_eq!(run.outcome, AsymptoticOutcome::Completed);
        let growth = run.history.last().unwrap().1 / run.history[0].1;
        assert!(growth < 10.0, "max|V| growth factor {growth}");
    }

    #[test]
    fn classify_canonical_examples() {
        let params = ClassifyParams::default();
        match classify(&QuadraticNonlinearity::null_form_q0(), &params).unwrap() {
            Classification::ClassicalNull { .. } => {}
            other => panic!("Q0 misclassified: {other:?}"),
        }
        match classify(&QuadraticNonlinearity::time_derivative_squared(), &params).unwrap() {
            Classification::BlowUp { s_star, .. } => {
                assert!(s_star > 0.0);
            }
            other => panic!("(∂_t φ)² misclassified: {other:?}"),
        }
        match classify(&QuadraticNonlinearity::model_linearization(1.0), &params).unwrap() {
            Classification::WeakNullEvidence { .. } => {}
            other => panic!("model family misclassified: {other:?}"),
        }
    }

    #[test]
    fn grammar_roundtrip() {
        let nl = parse_nonlinearity("t,t,1.0\n").unwrap();
        assert_eq!(nl.terms().len(), 1);
        let nl = parse_nonlinearity("# model\n,xx+yy+zz,-2.0\n").unwrap();
        assert_eq!(nl.terms().len(), 3);
        let a = asymptotic_coefficients(&nl, [1.0, 0.0, 0.0]);
        assert!((a.coeff(0, 2) + 0.5).abs() < 1e-15);
        assert!(parse_nonlinearity("t,t\n").is_err());
        assert!(parse_nonlinearity("t,w,1.0\n").is_err());
        assert!(parse_nonlinearity("ttt,t,1.0\n").is_err());
    }
}
