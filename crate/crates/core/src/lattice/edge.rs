//! Boundary amplitudes and edge-mode labels.

use serde::{Deserialize, Serialize};

use super::spectrum::{boundary_weights, SpectrumResult};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

impl std::str::FromStr for Side {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "left" | "l" => Ok(Side::Left),
            "right" | "r" => Ok(Side::Right),
            other => Err(crate::Error::InvalidParameter(format!(
                "side must be left or right, got `{other}`"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeModeInfo<T> {
    /// `|psi_1|`
    pub first: T,
    /// `|psi_N|`
    pub last: T,
    pub side: Option<Side>,
}

/// Labels a normalized state by where its boundary weight exceeds one half.
pub fn edge_info<T: Real>(state: &[T]) -> EdgeModeInfo<T> {
    let density: Vec<T> = state.iter().map(|&a| a * a).collect();
    let (left, right) = boundary_weights(&density);
    let norm = density.iter().fold(T::zero(), |a, &b| a + b).sqrt();
    let half = T::lit(0.5);
    let side = if left > half {
        Some(Side::Left)
    } else if right > half {
        Some(Side::Right)
    } else {
        None
    };
    EdgeModeInfo {
        first: state[0].abs() / norm,
        last: state[state.len() - 1].abs() / norm,
        side,
    }
}

pub fn edge_mode_weights<T: Real>(spectrum: &SpectrumResult<T>) -> Vec<EdgeModeInfo<T>> {
    (0..spectrum.len())
        .map(|k| edge_info(spectrum.states.column(k).as_slice()))
        .collect()
}
