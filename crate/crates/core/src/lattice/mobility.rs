//! Analytic mobility edge and the IPR-based localization classifier.

use serde::{Deserialize, Serialize};

use super::spectrum::{median, SpectrumResult};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Critical energy `E_c = V_c cosh(u) - t` with `t = e^u`.
pub fn mobility_edge_energy<T: Real>(v_c: T, u: T) -> Result<T> {
    Ok(MobilityEdgeLine::new(u)?.evaluate(v_c))
}

/// The straight line `V_c -> E_c` for fixed decay coefficient `u`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MobilityEdgeLine<T> {
    pub u: T,
    pub t: T,
}

impl<T: Real> MobilityEdgeLine<T> {
    pub fn new(u: T) -> Result<Self> {
        if !(u.is_finite_value() && u > T::zero()) {
            return Err(Error::InvalidParameter(format!("u must be positive, got {u}")));
        }
        Ok(MobilityEdgeLine { u, t: u.exp() })
    }

    pub fn slope(&self) -> T {
        self.u.cosh()
    }

    pub fn evaluate(&self, v_c: T) -> T {
        v_c * self.slope() - self.t
    }

    /// Strength at which the line passes through energy `e`.
    pub fn strength_at(&self, e: T) -> T {
        (e + self.t) / self.slope()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Localization {
    Delocalized,
    Localized,
    Indeterminate,
}

impl Localization {
    pub fn as_str(self) -> &'static str {
        match self {
            Localization::Delocalized => "delocalized",
            Localization::Localized => "localized",
            Localization::Indeterminate => "indeterminate",
        }
    }
}

/// Delocalized below `alpha / N`, localized above `beta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationThresholds {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for LocalizationThresholds {
    fn default() -> Self {
        LocalizationThresholds {
            alpha: 3.0,
            beta: 0.1,
        }
    }
}

impl LocalizationThresholds {
    pub fn classify(&self, ipr: f64, n: usize) -> Localization {
        if ipr < self.alpha / n as f64 {
            Localization::Delocalized
        } else if ipr > self.beta {
            Localization::Localized
        } else {
            Localization::Indeterminate
        }
    }

    /// Geometric midpoint of the indeterminate band.
    pub fn log_midpoint(&self, n: usize) -> f64 {
        (self.alpha / n as f64 * self.beta).sqrt()
    }
}

pub fn classify_localization<T: Real>(
    spectrum: &SpectrumResult<T>,
    thresholds: &LocalizationThresholds,
) -> Vec<Localization> {
    let n = spectrum.len();
    spectrum
        .ipr
        .iter()
        .map(|&p| thresholds.classify(p.as_f64(), n))
        .collect()
}

/// Median IPR over states whose boundary weights are both at most one half.
pub fn median_bulk_ipr<T: Real>(spectrum: &SpectrumResult<T>) -> Option<f64> {
    let bulk: Vec<f64> = (0..spectrum.len())
        .filter(|&k| !spectrum.is_edge_state(k))
        .map(|k| spectrum.ipr[k].as_f64())
        .collect();
    (!bulk.is_empty()).then(|| median(bulk))
}

/// Linear interpolation, in `log(y)`, of the first upward crossing of
/// `level` by the samples `(x_i, y_i)`.
pub fn log_crossing(xs: &[f64], ys: &[f64], level: f64) -> Option<f64> {
    let target = level.ln();
    xs.windows(2).zip(ys.windows(2)).find_map(|(x, y)| {
        let (a, b) = (y[0].ln() - target, y[1].ln() - target);
        (a < 0.0 && b >= 0.0).then(|| x[0] + (x[1] - x[0]) * (-a) / (b - a))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn reference_points() {
        let e2 = mobility_edge_energy(2.0, 1.0).unwrap();
        assert!((e2 - (2.0 * 1f64.cosh() - E)).abs() < 1e-15);
        assert!((e2 - 0.36788).abs() < 1e-5);
        assert!((mobility_edge_energy(0.0, 1.0).unwrap() + E).abs() < 1e-15);
        let a: f64 = mobility_edge_energy(3.042, 1.0).unwrap();
        assert!((a - 1.9758).abs() < 1e-4, "{a}");
        assert!(mobility_edge_energy(1.0, 0.0).is_err());
    }

    #[test]
    fn strength_inverts_energy() {
        let line = MobilityEdgeLine::<f64>::new(1.0).unwrap();
        for v in [0.0f64, 0.5, 1.434, 3.042] {
            assert!((line.strength_at(line.evaluate(v)) - v).abs() < 1e-14);
        }
    }

    #[test]
    fn classifier_bands() {
        let t = LocalizationThresholds::default();
        assert_eq!(t.classify(1.0 / 33.0, 33), Localization::Delocalized);
        assert_eq!(t.classify(1.0, 33), Localization::Localized);
        assert_eq!(t.classify(0.095, 33), Localization::Indeterminate);
        let mid = t.log_midpoint(144);
        assert!(mid > 3.0 / 144.0 && mid < 0.1);
    }

    #[test]
    fn crossing_interpolates_in_log() {
        let x = [1.0, 2.0, 3.0];
        let y = [0.01, 0.1, 1.0];
        let c = log_crossing(&x, &y, 10f64.powf(-1.5)).unwrap();
        assert!((c - 1.5).abs() < 1e-12);
        assert!(log_crossing(&x, &y, 2.0).is_none());
    }
}
