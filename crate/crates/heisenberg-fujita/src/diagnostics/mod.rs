//! Decay-rate fits, blow-up functionals and brute-force oracles.

mod decay;
mod functionals;
mod oracles;
mod report;

pub use decay::{
    decay_geometry, hardy_smoothing_decay, hardy_smoothing_sensitivity, heat_samples, henon_expected_exponent,
    henon_weighted_decay, smoothed_weight_sup, DecayOutcome, HeatSamples, LEAKAGE_GUARD,
};
pub use functionals::{
    critical_mass_growth, fujita_expected_exponent, fujita_functional, hardy_blowup_functional,
    hardy_expected_exponent, tq2_contradiction_probe, CriticalMass,
};
pub use oracles::{
    rearrangement_max_at_origin, reverse_holder_check, RearrangementCase, RearrangementOutcome, ReverseHolder,
};
pub use report::{report_csv, DiagnosticRow, RowVerdict, REPORT_HEADER};

use crate::error::{Error, Result};

/// Least-squares fit of `value ≈ prefactor · t^exponent` in log-log coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub t_range: (f64, f64),
    pub samples: usize,
}

/// Fits with fewer samples are rejected.
pub const MIN_FIT_SAMPLES: usize = 8;
/// Fits below this r² are inconclusive.
pub const MIN_R_SQUARED: f64 = 0.95;

impl SlopeFit {
    pub fn is_conclusive(&self) -> bool {
        self.r_squared >= MIN_R_SQUARED
    }

    /// Whether the exponent is within `rel_tol` of `expected` (relative), with a conclusive r².
    pub fn matches(&self, expected: f64, rel_tol: f64) -> bool {
        self.is_conclusive() && (self.exponent - expected).abs() <= rel_tol * expected.abs()
    }
}

/// Ordinary least squares `y = a + b x`, returning `(a, b, r²)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Argument("linear fit needs two or more paired samples".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Numerical("fit abscissae are all equal".into()));
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy > 0.0 { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) } else { 1.0 };
    Ok((a, b, r2))
}

/// Power-law fit over samples `(t, value)`; values must be positive.
pub fn fit_power_law(samples: &[(f64, f64)]) -> Result<SlopeFit> {
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(Error::Argument(format!(
            "power-law fit needs at least {MIN_FIT_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().all(|&(_, v)| v.abs() < 1e-14) {
        return Err(Error::Numerical("all fit values are below 1e-14".into()));
    }
    if let Some(&(t, v)) = samples.iter().find(|&&(t, v)| !(t > 0.0 && v > 0.0)) {
        return Err(Error::Numerical(format!("non-positive sample ({t}, {v}) in a power-law fit")));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let (a, b, r2) = linear_fit(&xs, &ys)?;
    let t_min = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let t_max = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    Ok(SlopeFit { exponent: b, prefactor: a.exp(), r_squared: r2, t_range: (t_min, t_max), samples: samples.len() })
}

/// `count` log-spaced times covering `[t_min, t_max]`.
pub fn log_spaced(t_min: f64, t_max: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![t_min];
    }
    let (a, b) = (t_min.ln(), t_max.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_is_recovered() {
        let s: Vec<(f64, f64)> = log_spaced(1.0, 10.0, 9).into_iter().map(|t| (t, 3.0 * t.powf(-1.5))).collect();
        let f = fit_power_law(&s).unwrap();
        assert!((f.exponent + 1.5).abs() < 1e-12);
        assert!((f.prefactor - 3.0).abs() < 1e-12);
        assert!(f.r_squared > 1.0 - 1e-12);
        assert!(f.matches(-1.5, 0.01));
    }

    #[test]
    fn degenerate_inputs_are_errors() {
        let zeros: Vec<(f64, f64)> = (1..10).map(|i| (i as f64, 0.0)).collect();
        assert!(matches!(fit_power_law(&zeros), Err(Error::Numerical(_))));
        assert!(matches!(fit_power_law(&zeros[..3]), Err(Error::Argument(_))));
    }
}
