//! Reproducible figure pipelines and the resumable sweep engine.

pub mod figures;
pub mod manifest;
pub mod sweep;
pub mod tasks;

pub use figures::{run_experiment, ExperimentName, ExperimentSpec, Overrides};
pub use manifest::{run_cells, CellRecord, Manifest, RunOutput};
pub use sweep::{run_sweep, Axis, AxisScale, SweepGrid, SweepOptions};
pub use tasks::{channel_level, SweepQuantity, SweepTask};
