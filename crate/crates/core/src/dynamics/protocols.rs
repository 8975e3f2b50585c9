//! Edge-mode pumping and boundary excitation transfer.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use super::channel::ChannelSpec;
use super::integrator::{complexify, evolve, IntegratorConfig, TrajectoryResult};
use crate::error::{Error, Result};
use crate::lattice::{
    boundary_weights, diagonalize, edge_info, partition_clusters, Channel, Lattice, ModelParams,
    Side,
};
use crate::scalar::Real;

/// An in-gap edge eigenstate located for a protocol endpoint.
#[derive(Clone, Debug)]
pub struct EdgeMode<T> {
    pub index: usize,
    pub energy: T,
    pub state: Vec<T>,
    pub boundary_weight: T,
}

/// Finds the eigenstate inside the channel's major gap that is localized on
/// `side` at phase `phi`. Picks the most strongly localized one when several
/// qualify.
pub fn find_edge_mode<T: Real>(
    lattice: &Lattice<T>,
    phi: T,
    channel: Channel,
    side: Side,
) -> Result<EdgeMode<T>> {
    let spectrum = diagonalize(&lattice.hamiltonian_at(phi))?;
    let partition = partition_clusters(&spectrum)?;
    let (lo, hi) = partition.gap_window(&spectrum, channel);
    let mut best: Option<EdgeMode<T>> = None;
    for k in 0..spectrum.len() {
        let e = spectrum.energies[k];
        if !(e > lo && e < hi) {
            continue;
        }
        let state = spectrum.state(k);
        if edge_info(&state).side != Some(side) {
            continue;
        }
        let weight = match side {
            Side::Left => spectrum.boundary_weight_left[k],
            Side::Right => spectrum.boundary_weight_right[k],
        };
        if best.as_ref().is_none_or(|b| weight > b.boundary_weight) {
            best = Some(EdgeMode {
                index: k,
                energy: e,
                state,
                boundary_weight: weight,
            });
        }
    }
    best.ok_or(Error::MissingEdgeMode {
        side: side.as_str(),
        phi: phi.as_f64(),
    })
}

#[derive(Clone, Debug)]
pub struct PumpOutcome<T: Real> {
    pub trajectory: TrajectoryResult<T>,
    pub initial_mode: EdgeMode<T>,
    pub goal_mode: EdgeMode<T>,
}

impl<T: Real> PumpOutcome<T> {
    pub fn fidelity(&self) -> T {
        self.trajectory.fidelity.expect("pump sets a goal state")
    }
}

/// Starts from the left edge mode of the channel's gap at `phi_start` and
/// scores the final state against the right edge mode at `phi_end`.
pub fn pump_edge_mode<T: Real>(
    params: &ModelParams<T>,
    channel: Channel,
    spec: &ChannelSpec<T>,
    config: &IntegratorConfig,
) -> Result<PumpOutcome<T>> {
    spec.validate()?;
    let lattice = Lattice::new(params.clone())?;
    let initial_mode = find_edge_mode(&lattice, spec.phi_start, channel, Side::Left)?;
    let goal_mode = find_edge_mode(&lattice, spec.phi_end, channel, Side::Right)?;
    let initial = complexify(&initial_mode.state);
    let goal = complexify(&goal_mode.state);
    let trajectory = evolve(
        &lattice,
        &spec.ramp(),
        initial.as_slice(),
        Some(goal.as_slice()),
        config,
    )?;
    Ok(PumpOutcome {
        trajectory,
        initial_mode,
        goal_mode,
    })
}

/// Single-site excitation on the boundary of `side`.
pub fn boundary_excitation<T: Real>(n: usize, side: Side) -> Vec<Complex<T>> {
    let mut v = vec![Complex::new(T::zero(), T::zero()); n];
    let m = match side {
        Side::Left => 0,
        Side::Right => n - 1,
    };
    v[m] = Complex::new(T::one(), T::zero());
    v
}

/// Injects an excitation on the `from` boundary site, sweeps the window and
/// scores against the opposite boundary site.
pub fn transfer_excitation<T: Real>(
    params: &ModelParams<T>,
    window: &ChannelSpec<T>,
    from: Side,
    config: &IntegratorConfig,
) -> Result<TrajectoryResult<T>> {
    window.validate()?;
    let lattice = Lattice::new(params.clone())?;
    let initial = boundary_excitation(params.n, from);
    let goal = boundary_excitation(params.n, from.opposite());
    evolve(&lattice, &window.ramp(), &initial, Some(&goal), config)
}

/// Coarse three-stage summary of a density trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageProfile {
    /// Smallest left-window weight over the first tenth of samples.
    pub early_left_weight: f64,
    /// Smallest density IPR over the middle half of samples.
    pub middle_min_ipr: f64,
    /// Smallest right-window weight over the last tenth of samples.
    pub late_right_weight: f64,
}

impl StageProfile {
    pub fn of<T: Real>(trajectory: &TrajectoryResult<T>) -> Self {
        let d: Vec<Vec<f64>> = trajectory
            .densities
            .iter()
            .map(|row| row.iter().map(|x| x.as_f64()).collect())
            .collect();
        let s = d.len();
        let tenth = (s / 10).max(1);
        let early = d[..tenth]
            .iter()
            .map(|row| boundary_weights(row).0)
            .fold(f64::INFINITY, f64::min);
        let late = d[s - tenth..]
            .iter()
            .map(|row| boundary_weights(row).1)
            .fold(f64::INFINITY, f64::min);
        let middle = d[s / 4..s - s / 4]
            .iter()
            .map(|row| crate::lattice::ipr_of_density(row.iter().copied()).unwrap_or(1.0))
            .fold(f64::INFINITY, f64::min);
        StageProfile {
            early_left_weight: early,
            middle_min_ipr: middle,
            late_right_weight: late,
        }
    }

    /// Left-localized, then extended, then right-localized.
    pub fn is_three_stage(&self) -> bool {
        self.early_left_weight > 0.5 && self.middle_min_ipr < 0.2 && self.late_right_weight > 0.5
    }
}
