//! Localization and quantum transport in a one-dimensional quasiperiodic
//! lattice with exponentially decaying hopping.
//!
//! The [`lattice`] module covers the static problem (Hamiltonian, spectrum,
//! IPR, mobility edge, cluster and edge-mode structure), [`dynamics`] the
//! phase-ramped Schrödinger evolution used for edge-mode pumping and
//! excitation transfer, and [`experiments`] the reproducible pipelines and
//! resumable parameter sweeps built on both.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod io;
pub mod lattice;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ModelParams64 = lattice::ModelParams<f64>;
pub type ModelParams32 = lattice::ModelParams<f32>;
pub type Spectrum64 = lattice::SpectrumResult<f64>;
pub type Spectrum32 = lattice::SpectrumResult<f32>;
pub type Lattice64 = lattice::Lattice<f64>;
pub type Trajectory64 = dynamics::TrajectoryResult<f64>;
pub type Trajectory32 = dynamics::TrajectoryResult<f32>;
