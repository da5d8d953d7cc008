//! Report containers shared by the grid-operator and diagnostics layers.

use serde::Serialize;

/// Per-inequality record: LHS/RHS samples, margins, and the minimal constant
/// making LHS <= C * RHS over everything sampled.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub id: String,
    pub times: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// margin = RHS - LHS per sample.
    pub margin: Vec<f64>,
    pub min_constant: f64,
    /// Hypothesis-side notes (failed preconditions, measured constants).
    pub flags: Vec<String>,
}

impl InequalityReport {
    pub fn new(id: impl Into<String>) -> Self {
        InequalityReport {
            id: id.into(),
            times: Vec::new(),
            lhs: Vec::new(),
            rhs: Vec::new(),
            margin: Vec::new(),
            min_constant: 0.0,

            flags: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, lhs: f64, rhs: f64) {
        self.times.push(t);
        self.lhs.push(lhs);
        self.rhs.push(rhs);
        self.margin.push(rhs - lhs);
        if rhs > 0.0 {
            self.min_constant = self.min_constant.max(lhs / rhs);
        } else if lhs > 0.0 {
            self.min_constant = f64::INFINITY;
        }
    }

    pub fn min_margin(&self) -> f64 {
        self.margin.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Least-squares power-law fit of a decaying or growing quantity.
#[derive(Debug, Clone, Serialize)]
pub struct DecayFitReport {
    pub quantity: String,
    pub window: (f64, f64),
    /// Fitted amplitude of quantity = constant * (1 + t)^exponent.
    pub constant: f64,
    /// None marks the degenerate all-zero fit.
    pub exponent: Option<f64>,
    /// RMS residual of the log-log fit.
    pub residual: f64,
    pub samples: usize,
}

/// Log-log least squares for y = c (1+t)^gamma over (t, y) samples with y > 0.
/// Zero samples are skipped; an all-zero series yields the degenerate fit.
pub fn fit_power_law(quantity: &str, samples: &[(f64, f64)]) -> DecayFitReport {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, y)| *y > 0.0 && y.is_finite())
        .map(|&(t, y)| ((1.0 + t).ln(), y.ln()))
        .collect();
    let window = (
        samples.first().map(|s| s.0).unwrap_or(0.0),
        samples.last().map(|s| s.0).unwrap_or(0.0),
    );
    if pts.len() < 2 {
        return DecayFitReport {
            quantity: quantity.to_string(),
            window,
            constant: 0.0,
            exponent: None,
            residual: 0.0,
            samples: pts.len(),
        };
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mut ss = 0.0;
    for (x, y) in &pts {
        let e = y - (intercept + slope * x);
        ss += e * e;
    }
    DecayFitReport {
        quantity: quantity.to_string(),
        window,
        constant: intercept.exp(),
        exponent: Some(slope),
        residual: (ss / n).sqrt(),
        samples: pts.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_recovery() {
        let samples: Vec<(f64, f64)> = (1..200)
            .map(|i| {
                let t = i as f64 * 0.5;
                (t, 3.25 * (1.0 + t).powf(-1.37))
            })
            .collect();
        let fit = fit_power_law("synthetic", &samples);
        assert!((fit.exponent.unwrap() + 1.37).abs() < 1e-6);
        assert!((fit.constant - 3.25).abs() < 1e-6);
        assert!(fit.residual < 1e-10);
    }

    #[test]
    fn degenerate_fit() {
        let samples = vec![(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)];
        let fit = fit_power_law("zero", &samples);
        assert!(fit.exponent.is_none());
        assert_eq!(fit.constant, 0.0);
    }

    #[test]
    fn margins_and_constant() {
        let mut r = InequalityReport::new("demo");
        r.push(0.0, 1.0, 4.0);
        r.push(1.0, 2.0, 4.0);
        assert_eq!(r.min_margin(), 2.0);
        assert_eq!(r.min_constant, 0.5);
    }
}
