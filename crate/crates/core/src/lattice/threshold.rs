//! Per-level localization thresholds by bisection on the modulation strength.

use serde::{Deserialize, Serialize};

use super::clusters::{partition_clusters, Channel};
use super::mobility::{LocalizationThresholds, MobilityEdgeLine};
use super::model::{build_hamiltonian, ModelParams, ModelKind};
use super::spectrum::{diagonalize, SpectrumResult};
use crate::error::{Error, Result};

/// How to pick the tracked level at every strength.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LevelSelector {
    /// Fixed position in the sorted spectrum.
    Index(usize),
    /// The channel's bulk subchannel, re-identified at every strength.
    BulkSubchannel(Channel),
}

impl LevelSelector {
    pub fn resolve(&self, spectrum: &SpectrumResult<f64>) -> Result<usize> {
        match *self {
            LevelSelector::Index(k) if k < spectrum.len() => Ok(k),
            LevelSelector::Index(k) => Err(Error::InvalidParameter(format!(
                "level index {k} out of range for N = {}",
                spectrum.len()
            ))),
            LevelSelector::BulkSubchannel(ch) => {
                Ok(partition_clusters(spectrum)?.bulk_subchannel(ch))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub v_c: f64,
    pub level_index: usize,
    pub level_energy: f64,
    /// Analytic mobility edge at `v_c` (absent for the nearest-neighbour model).
    pub mobility_edge: Option<f64>,
    /// Smaller of the two spacings to the neighbouring levels at `v_c`.
    pub local_spacing: f64,
}

/// Step of the coarse scan that brackets the first upward crossing.
const SCAN_STEP: f64 = 0.02;
const TOLERANCE: f64 = 1e-3;

struct Probe {
    log_excess: f64,
    level: usize,
    spectrum: SpectrumResult<f64>,
}

fn probe(
    selector: LevelSelector,
    params: &ModelParams<f64>,
    v: f64,
    thresholds: &LocalizationThresholds,
) -> Result<Probe> {
    let spectrum = diagonalize(&build_hamiltonian(&params.with_v(v))?)?;
    let level = selector.resolve(&spectrum)?;
    let mid = thresholds.log_midpoint(spectrum.len());
    Ok(Probe {
        log_excess: spectrum.ipr[level].ln() - mid.ln(),
        level,
        spectrum,
    })
}

/// Strength at which the tracked level's IPR first rises through the
/// log-midpoint of the classifier's indeterminate band.
pub fn find_sublevel_threshold(
    selector: LevelSelector,
    params: &ModelParams<f64>,
    v_range: (f64, f64),
    thresholds: &LocalizationThresholds,
) -> Result<ThresholdEstimate> {
    let (lo, hi) = v_range;
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
        return Err(Error::InvalidParameter(format!(
            "V range must satisfy 0 <= lo < hi, got [{lo}, {hi}]"
        )));
    }
    let no_transition = Error::NoTransition { lo, hi };
    if probe(selector, params, lo, thresholds)?.log_excess > 0.0 {
        return Err(no_transition);
    }
    let steps = ((hi - lo) / SCAN_STEP).ceil() as usize;
    let mut below = lo;
    let mut above = None;
    for i in 1..=steps {
        let v = (lo + (hi - lo) * i as f64 / steps as f64).min(hi);
        if probe(selector, params, v, thresholds)?.log_excess > 0.0 {
            above = Some(v);
            break;
        }
        below = v;
    }
    let mut above = above.ok_or(no_transition)?;
    while above - below > TOLERANCE {
        let mid = 0.5 * (below + above);
        if probe(selector, params, mid, thresholds)?.log_excess > 0.0 {
            above = mid;
        } else {
            below = mid;
        }
    }
    let v_c = 0.5 * (below + above);
    let at = probe(selector, params, v_c, thresholds)?;
    let e = &at.spectrum.energies;
    let k = at.level;
    let mut spacing = f64::INFINITY;
    if k > 0 {
        spacing = spacing.min(e[k] - e[k - 1]);
    }
    if k + 1 < e.len() {
        spacing = spacing.min(e[k + 1] - e[k]);
    }
    let mobility_edge = match params.kind {
        ModelKind::ExpHopping => Some(MobilityEdgeLine::new(params.u)?.evaluate(v_c)),
        ModelKind::Aa => None,
    };
    Ok(ThresholdEstimate {
        v_c,
        level_index: k,
        level_energy: e[k],
        mobility_edge,
        local_spacing: spacing,
    })
}
