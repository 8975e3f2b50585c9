//! Static lattice physics: Hamiltonian, spectrum and localization diagnostics.

pub mod clusters;
pub mod edge;
pub mod mobility;
pub mod model;
pub mod spectrum;
pub mod threshold;

pub use clusters::{partition_clusters, Channel, ClusterLabel, ClusterPartition};
pub use edge::{edge_info, edge_mode_weights, EdgeModeInfo, Side};
pub use mobility::{
    classify_localization, log_crossing, median_bulk_ipr, mobility_edge_energy, Localization, LocalizationThresholds,
    MobilityEdgeLine,
};
pub use model::{build_hamiltonian, HoppingRange, Lattice, ModelKind, ModelParams};
pub use spectrum::{
    boundary_weights, boundary_window, diagonalize, eigh, ipr, ipr_of_density, SpectrumResult,
};
pub use threshold::{find_sublevel_threshold, LevelSelector, ThresholdEstimate};
