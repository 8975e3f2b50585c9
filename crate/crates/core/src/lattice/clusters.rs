//! Three-cluster band structure of the golden-mean spectrum.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::spectrum::{median, SpectrumResult};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Minimum ratio between a major gap and the median level spacing.
pub const GAP_SIGNIFICANCE: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterLabel {
    Lower,
    Middle,
    Upper,
    EdgeCrossing,
}

impl ClusterLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ClusterLabel::Lower => "lower",
            ClusterLabel::Middle => "middle",
            ClusterLabel::Upper => "upper",
            ClusterLabel::EdgeCrossing => "edge-crossing",
        }
    }
}

/// Pumping channel: which major gap hosts the edge modes and which bulk
/// sublevel bridges them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    /// Upper gap; bulk subchannel at the bottom of the upper cluster.
    A,
    /// Lower gap; bulk subchannel at the bottom of the middle cluster.
    B,
}

impl Channel {
    pub fn as_str(self) -> &'static str {
        match self {
            Channel::A => "A",
            Channel::B => "B",
        }
    }
}

impl std::str::FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Channel::A),
            "B" | "b" => Ok(Channel::B),
            other => Err(Error::InvalidParameter(format!(
                "channel must be A or B, got `{other}`"
            ))),
        }
    }
}

/// Split of the sorted spectrum into lower / middle / upper clusters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterPartition {
    /// Sorted indices of the last state below each major gap, ascending.
    pub gap_indices: [usize; 2],
    pub cluster_ranges: [Range<usize>; 3],
    /// Lowest bulk level of the upper cluster.
    pub bulk_subchannel_a: usize,
    /// Lowest bulk level of the middle cluster.
    pub bulk_subchannel_b: usize,
}

impl ClusterPartition {
    pub fn bulk_subchannel(&self, channel: Channel) -> usize {
        match channel {
            Channel::A => self.bulk_subchannel_a,
            Channel::B => self.bulk_subchannel_b,
        }
    }

    pub fn cluster_of(&self, k: usize) -> ClusterLabel {
        if self.cluster_ranges[0].contains(&k) {
            ClusterLabel::Lower
        } else if self.cluster_ranges[1].contains(&k) {
            ClusterLabel::Middle
        } else {
            ClusterLabel::Upper
        }
    }

    pub fn labels<T: Real>(&self, spectrum: &SpectrumResult<T>) -> Vec<ClusterLabel> {
        (0..spectrum.len())
            .map(|k| {
                if spectrum.is_edge_state(k) {
                    ClusterLabel::EdgeCrossing
                } else {
                    self.cluster_of(k)
                }
            })
            .collect()
    }

    /// Energy window `(top of bulk below, bottom of bulk above)` of the major
    /// gap that hosts the channel's edge modes.
    pub fn gap_window<T: Real>(&self, spectrum: &SpectrumResult<T>, channel: Channel) -> (T, T) {
        let slot = match channel {
            Channel::A => 1,
            Channel::B => 0,
        };
        let above = self.bulk_subchannel(channel);
        (spectrum.energies[self.gap_indices[slot]], spectrum.energies[above])
    }
}

/// Locates the two largest gaps among bulk (non-edge) levels.
pub fn partition_clusters<T: Real>(spectrum: &SpectrumResult<T>) -> Result<ClusterPartition> {
    let n = spectrum.len();
    let bulk: Vec<usize> = (0..n).filter(|&k| !spectrum.is_edge_state(k)).collect();
    if bulk.len() < 4 {
        return Err(Error::NoClusterStructure {
            largest: 0.0,
            second: 0.0,
            median: 0.0,
            factor: GAP_SIGNIFICANCE,
        });
    }
    let gaps: Vec<T> = bulk
        .windows(2)
        .map(|w| spectrum.energies[w[1]] - spectrum.energies[w[0]])
        .collect();
    let med = median(gaps.clone());

    let mut ranked: Vec<usize> = (0..gaps.len()).collect();
    ranked.sort_by(|&a, &b| gaps[b].partial_cmp(&gaps[a]).expect("finite gaps"));
    let (first, second) = (ranked[0], ranked[1]);
    let threshold = med * T::lit(GAP_SIGNIFICANCE);
    if gaps[second] < threshold || med <= T::zero() {
        return Err(Error::NoClusterStructure {
            largest: gaps[first].as_f64(),
            second: gaps[second].as_f64(),
            median: med.as_f64(),
            factor: GAP_SIGNIFICANCE,
        });
    }
    let (lo, hi) = (first.min(second), first.max(second));
    let b = bulk[lo + 1];
    let a = bulk[hi + 1];
    Ok(ClusterPartition {
        gap_indices: [bulk[lo], bulk[hi]],
        cluster_ranges: [0..b, b..a, a..n],
        bulk_subchannel_a: a,
        bulk_subchannel_b: b,
    })
}
