//! Scalar cell tasks for (V, omega) and (V, phi) sweeps.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::sweep::Axis;
use crate::dynamics::{pump_edge_mode, transfer_excitation, ChannelSpec, IntegratorConfig};
use crate::error::{Error, Result};
use crate::lattice::{diagonalize, partition_clusters, Channel, Lattice, ModelParams, Side};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepQuantity {
    /// Edge-mode pumping fidelity over (V, omega).
    PumpFidelity,
    /// Boundary excitation transfer fidelity over (V, omega).
    TransferFidelity,
    /// Gap between the bulk subchannel and the level above it over (V, phi).
    LevelGap,
    /// IPR of the bulk subchannel over (V, phi).
    LevelIpr,
}

impl SweepQuantity {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepQuantity::PumpFidelity => "pump-fidelity",
            SweepQuantity::TransferFidelity => "transfer-fidelity",
            SweepQuantity::LevelGap => "level-gap",
            SweepQuantity::LevelIpr => "level-ipr",
        }
    }

    /// Whether the second axis is omega (logarithmic) rather than phi.
    pub fn log_y(self) -> bool {
        matches!(
            self,
            SweepQuantity::PumpFidelity | SweepQuantity::TransferFidelity
        )
    }

    pub fn value_name(self) -> &'static str {
        match self {
            SweepQuantity::PumpFidelity | SweepQuantity::TransferFidelity => "fidelity",
            SweepQuantity::LevelGap => "gap",
            SweepQuantity::LevelIpr => "ipr",
        }
    }

    /// Second sweep axis, defaulting to omega in [1e-6, 1e-3] or to the
    /// channel's phase window.
    pub fn y_axis(self, channel: Channel, min: Option<f64>, max: Option<f64>, count: usize) -> Axis {
        if self.log_y() {
            Axis::log("omega", min.unwrap_or(1e-6), max.unwrap_or(1e-3), count)
        } else {
            let (a, b) = match channel {
                Channel::A => (0.39, 1.59),
                Channel::B => (0.59, 1.39),
            };
            Axis::linear("phi_over_pi", min.unwrap_or(a), max.unwrap_or(b), count)
        }
    }
}

impl std::str::FromStr for SweepQuantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pump-fidelity" | "pump" => Ok(SweepQuantity::PumpFidelity),
            "transfer-fidelity" | "transfer" => Ok(SweepQuantity::TransferFidelity),
            "level-gap" | "gap" => Ok(SweepQuantity::LevelGap),
            "level-ipr" | "ipr" => Ok(SweepQuantity::LevelIpr),
            other => Err(Error::InvalidParameter(format!(
                "quantity must be one of pump-fidelity, transfer-fidelity, level-gap, level-ipr; got `{other}`"
            ))),
        }
    }
}

/// Everything a cell needs besides its coordinates `(V, y)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepTask {
    pub quantity: SweepQuantity,
    /// Base model; `v` (and `phi` for level sweeps) come from the cell.
    pub params: ModelParams<f64>,
    pub channel: Channel,
    /// Injection side for transfer sweeps.
    pub from: Side,
    /// Explicit window endpoints in radians; `None` uses the default.
    pub window: Option<(f64, f64)>,
    pub integrator: IntegratorConfig,
}

impl SweepTask {
    /// Stable description used as the checkpoint label.
    pub fn label(&self) -> String {
        serde_json::to_string(self).expect("task serializes")
    }

    fn window(&self, omega: f64) -> Result<ChannelSpec<f64>> {
        let base = match self.quantity {
            SweepQuantity::TransferFidelity => ChannelSpec::transfer_window(omega)?,
            _ => ChannelSpec::pump(self.channel, omega)?,
        };
        match self.window {
            Some((a, b)) => ChannelSpec::new(a, b, omega),
            None => Ok(base),
        }
    }

    /// Evaluates one cell at `coords = [V, y]`.
    pub fn evaluate(&self, coords: &[f64]) -> Result<f64> {
        let [v, y] = coords else {
            return Err(Error::InvalidParameter(format!(
                "sweep cells need two coordinates, got {}",
                coords.len()
            )));
        };
        let params = self.params.with_v(*v);
        match self.quantity {
            SweepQuantity::PumpFidelity => {
                let spec = self.window(*y)?;
                Ok(pump_edge_mode(&params, self.channel, &spec, &self.integrator)?.fidelity())
            }
            SweepQuantity::TransferFidelity => {
                let spec = self.window(*y)?;
                let traj = transfer_excitation(&params, &spec, self.from, &self.integrator)?;
                Ok(traj.fidelity.expect("transfer sets a goal"))
            }
            SweepQuantity::LevelGap | SweepQuantity::LevelIpr => {
                let mut spec = self.window(1.0)?;
                let level = spec.resolve_level(&params, self.channel)?;
                let lattice = Lattice::new(params)?;
                let s = diagonalize(&lattice.hamiltonian_at(y * PI))?;
                if self.quantity == SweepQuantity::LevelIpr {
                    return Ok(s.ipr[level]);
                }
                if level + 1 >= s.len() {
                    return Err(Error::InvalidParameter(
                        "channel level is the top of the spectrum".into(),
                    ));
                }
                Ok(s.energies[level + 1] - s.energies[level])
            }
        }
    }
}

/// Bulk-subchannel index of `channel` at the reference phase `phi_ref`.
pub fn channel_level(params: &ModelParams<f64>, channel: Channel, phi_ref: f64) -> Result<usize> {
    let lattice = Lattice::new(params.clone())?;
    let s = diagonalize(&lattice.hamiltonian_at(phi_ref))?;
    Ok(partition_clusters(&s)?.bulk_subchannel(channel))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantity_names_round_trip() {
        for q in [
            SweepQuantity::PumpFidelity,
            SweepQuantity::TransferFidelity,
            SweepQuantity::LevelGap,
            SweepQuantity::LevelIpr,
        ] {
            assert_eq!(q.as_str().parse::<SweepQuantity>().unwrap(), q);
        }
    }

    #[test]
    fn level_gap_is_positive() {
        let task = SweepTask {
            quantity: SweepQuantity::LevelGap,
            params: ModelParams::sample(1.0, 0.99 * PI, 33),
            channel: Channel::A,
            from: Side::Left,
            window: None,
            integrator: IntegratorConfig::default(),
        };
        let g = task.evaluate(&[1.0, 0.99]).unwrap();
        assert!(g > 0.0);
        assert!(task.evaluate(&[1.0]).is_err());
    }
}
