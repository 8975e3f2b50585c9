//! Phase-ramped Schrödinger dynamics and the pumping / transfer protocols.

pub mod channel;
pub mod gap;
pub mod integrator;
pub mod protocols;

pub use channel::{ChannelSpec, PhaseRamp};
pub use gap::{min_gap, MinGap};
pub use integrator::{
    complexify, evolve, fidelity, norm_sqr, IntegratorConfig, Scheme, TrajectoryResult,
};
pub use protocols::{
    boundary_excitation, find_edge_mode, pump_edge_mode, transfer_excitation, EdgeMode,
    PumpOutcome, StageProfile,
};
