//! On-disk layouts for spectra and trajectories.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use super::table::{write_csv, Cell, Table};
use crate::dynamics::{ChannelSpec, IntegratorConfig, TrajectoryResult};
use crate::error::{Error, Result};
use crate::lattice::{ModelParams, SpectrumResult};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One row per state: index, energy, ipr, bw_left, bw_right, cluster.
pub fn spectrum_table(spectrum: &SpectrumResult<f64>, params: &ModelParams<f64>) -> Table {
    let mut t = Table::new(["index", "energy", "ipr", "bw_left", "bw_right", "cluster"]);
    t.comment(param_echo(params));
    for k in 0..spectrum.len() {
        let cluster = spectrum
            .cluster_labels
            .as_ref()
            .map_or("none", |labels| labels[k].as_str());
        t.push(vec![
            k.into(),
            spectrum.energies[k].into(),
            spectrum.ipr[k].into(),
            spectrum.boundary_weight_left[k].into(),
            spectrum.boundary_weight_right[k].into(),
            cluster.into(),
        ]);
    }
    t
}

/// Long format: one row per (sample, site).
pub fn trajectory_table(trajectory: &TrajectoryResult<f64>) -> Table {
    let mut t = Table::new(["time", "site", "density"]);
    for (time, density) in trajectory.times.iter().zip(&trajectory.densities) {
        for (m, &d) in density.iter().enumerate() {
            t.push(vec![Cell::Float(*time), (m + 1).into(), d.into()]);
        }
    }
    t
}

pub fn param_echo<P: Serialize>(params: &P) -> String {
    serde_json::to_string(params).expect("parameters serialize")
}

pub fn write_json<P: Serialize>(path: &Path, value: &P) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json(path: &Path) -> Result<serde_json::Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Writes `<stem>.csv` plus a `<stem>.json` parameter sidecar.
pub fn write_spectrum(
    dir: &Path,
    stem: &str,
    spectrum: &SpectrumResult<f64>,
    params: &ModelParams<f64>,
) -> Result<Vec<String>> {
    let csv = format!("{stem}.csv");
    let sidecar = format!("{stem}.json");
    write_csv(&dir.join(&csv), &spectrum_table(spectrum, params))?;
    write_json(
        &dir.join(&sidecar),
        &json!({
            "params": params,
            "partition": spectrum.partition,
            "tool_version": TOOL_VERSION,
        }),
    )?;
    Ok(vec![csv, sidecar])
}

#[derive(Serialize)]
pub struct TrajectorySummary<'a> {
    pub params: &'a ModelParams<f64>,
    pub channel: &'a ChannelSpec<f64>,
    pub integrator: &'a IntegratorConfig,
    pub fidelity: Option<f64>,
    pub norm_drift: f64,
    pub dt_used: f64,
    pub steps: usize,
    pub hamiltonian_refreshes: usize,
    pub wall_time_s: f64,
    pub tool_version: &'static str,
}

/// Writes `<stem>.csv` (time, site, density) and a `<stem>.json` summary.
#[allow(clippy::too_many_arguments)]
pub fn write_trajectory(
    dir: &Path,
    stem: &str,
    trajectory: &TrajectoryResult<f64>,
    params: &ModelParams<f64>,
    channel: &ChannelSpec<f64>,
    integrator: &IntegratorConfig,
    wall_time_s: f64,
) -> Result<Vec<String>> {
    let csv = format!("{stem}.csv");
    let summary = format!("{stem}.json");
    let mut table = trajectory_table(trajectory);
    table.comment(param_echo(params));
    table.comment(param_echo(channel));
    write_csv(&dir.join(&csv), &table)?;
    write_json(
        &dir.join(&summary),
        &TrajectorySummary {
            params,
            channel,
            integrator,
            fidelity: trajectory.fidelity,
            norm_drift: trajectory.norm_drift,
            dt_used: trajectory.dt,
            steps: trajectory.steps,
            hamiltonian_refreshes: trajectory.hamiltonian_refreshes,
            wall_time_s,
            tool_version: TOOL_VERSION,
        },
    )?;
    Ok(vec![csv, summary])
}
