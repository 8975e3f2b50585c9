//! Executes a resolved [`RunConfig`] and writes its run directory.

use std::f64::consts::PI;
use std::fmt::Write;
use std::time::Instant;

use serde_json::json;

use super::config::{CommandKind, RunConfig};
use super::formats::{write_spectrum, write_trajectory};
use super::plot::PlotKind;
use super::table::Table;
use crate::dynamics::{min_gap, pump_edge_mode, transfer_excitation, StageProfile};
use crate::error::Result;
use crate::experiments::{
    channel_level, run_experiment, run_sweep, Axis, CellRecord, ExperimentSpec, Manifest,
    RunOutput, SweepGrid, SweepOptions, SweepTask,
};
use crate::lattice::{
    classify_localization, diagonalize, find_sublevel_threshold, median_bulk_ipr, Lattice,
    LevelSelector, Localization, LocalizationThresholds,
};

/// Manifest of the run plus a short human-readable report.
#[derive(Debug)]
pub struct Outcome {
    pub manifest: Manifest,
    pub report: String,
}

const TRAJECTORY_PLOT: PlotKind = PlotKind::Map {
    x: 1,
    y: 2,
    value: 3,
    log_y: false,
};

fn single_cell(label: &str, start: Instant) -> CellRecord {
    CellRecord {
        label: label.into(),
        status: "ok",
        error: None,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let echo = serde_json::to_value(cfg).expect("config serializes");
    if cfg.command == CommandKind::Experiment {
        let name = cfg.experiment.name.expect("validated");
        let spec = ExperimentSpec {
            name,
            overrides: cfg.experiment.overrides.clone(),
            output_dir: cfg.run_dir(),
            integrator: cfg.integrator,
            workers: cfg.workers,
            cell_budget: cfg.sweep.cell_budget,
            emit_plot_script: cfg.output.emit_plot_script,
        };
        let manifest = run_experiment(&spec, echo)?;
        let report = format!(
            "{}: {} files, {} cells ({} failed) in {}",
            name.as_str(),
            manifest.files.len(),
            manifest.cells.len(),
            manifest.failed_cells,
            cfg.run_dir().display()
        );
        return Ok(Outcome { manifest, report });
    }

    let mut out = RunOutput::new(&cfg.run_dir(), cfg.command.as_str())?;
    let params = cfg.model.params();
    let data = out.data_dir();
    let mut report = String::new();
    let start = Instant::now();
    match cfg.command {
        CommandKind::Spectrum => {
            let s = diagonalize(&Lattice::new(params.clone())?.hamiltonian())?;
            for f in write_spectrum(&data, "spectrum", &s, &params)? {
                let plot = f.ends_with(".csv").then_some(PlotKind::Lines { x: 1, y: vec![2] });
                out.register(&f, plot);
            }
            let labels = classify_localization(&s, &LocalizationThresholds::default());
            let count = |l| labels.iter().filter(|&&x| x == l).count();
            let _ = writeln!(
                report,
                "N = {}: {} delocalized, {} indeterminate, {} localized, {} edge states",
                s.len(),
                count(Localization::Delocalized),
                count(Localization::Indeterminate),
                count(Localization::Localized),
                (0..s.len()).filter(|&k| s.is_edge_state(k)).count()
            );
            match &s.partition {
                Some(p) => {
                    let _ = write!(
                        report,
                        "clusters {:?}; bulk subchannel A = {}, B = {}",
                        p.cluster_ranges, p.bulk_subchannel_a, p.bulk_subchannel_b
                    );
                }
                None => report.push_str("no three-cluster structure"),
            }
            out.add_cells([single_cell("spectrum", start)]);
        }
        CommandKind::IprScan => {
            let thresholds = LocalizationThresholds::default();
            let mut states = Table::new(["V", "index", "energy", "ipr", "localization", "edge"]);
            let mut summary = Table::new([
                "V",
                "median_bulk_ipr",
                "log_midpoint",
                "delocalized",
                "indeterminate",
                "localized",
            ]);
            let lattice_params = params.clone();
            for v in cfg.scan.v_values() {
                let cell_start = Instant::now();
                let s = diagonalize(&Lattice::new(lattice_params.with_v(v))?.hamiltonian())?;
                let labels = classify_localization(&s, &thresholds);
                for k in 0..s.len() {
                    states.push(vec![
                        v.into(),
                        k.into(),
                        s.energies[k].into(),
                        s.ipr[k].into(),
                        labels[k].as_str().into(),
                        (s.is_edge_state(k) as usize).into(),
                    ]);
                }
                let count = |l| labels.iter().filter(|&&x| x == l).count();
                summary.push(vec![
                    v.into(),
                    median_bulk_ipr(&s).unwrap_or(f64::NAN).into(),
                    thresholds.log_midpoint(s.len()).into(),
                    count(Localization::Delocalized).into(),
                    count(Localization::Indeterminate).into(),
                    count(Localization::Localized).into(),
                ]);
                out.add_cells([single_cell(&format!("V={v}"), cell_start)]);
            }
            out.write_table("ipr_scan.csv", &states, Some(PlotKind::Scatter { x: 1, y: 3, color: 4 }))?;
            out.write_table("ipr_scan_summary.csv", &summary, Some(PlotKind::Lines { x: 1, y: vec![2, 3] }))?;
            let _ = write!(report, "{} V points", summary.rows.len());
        }
        CommandKind::Pump => {
            let mut window = cfg.channel.pump_spec()?;
            window.resolve_level(&params, cfg.channel.name).ok();
            let outcome = pump_edge_mode(&params, cfg.channel.name, &window, &cfg.integrator)?;
            let wall = start.elapsed().as_secs_f64();
            let stem = format!("pump_{}", cfg.channel.name.as_str());
            let files = write_trajectory(&data, &stem, &outcome.trajectory, &params, &window, &cfg.integrator, wall)?;
            out.register(&files[0], Some(TRAJECTORY_PLOT));
            out.register(&files[1], None);
            let p = StageProfile::of(&outcome.trajectory);
            let _ = write!(
                report,
                "channel {} fidelity {:.6} (norm drift {:.1e}); edge modes {} -> {}; stages {:.3}/{:.3}/{:.3}",
                cfg.channel.name.as_str(),
                outcome.fidelity(),
                outcome.trajectory.norm_drift,
                outcome.initial_mode.index,
                outcome.goal_mode.index,
                p.early_left_weight,
                p.middle_min_ipr,
                p.late_right_weight
            );
            out.add_cells([single_cell(&stem, start)]);
        }
        CommandKind::Transfer => {
            let window = cfg.channel.transfer_spec()?;
            let traj = transfer_excitation(&params, &window, cfg.channel.from, &cfg.integrator)?;
            let wall = start.elapsed().as_secs_f64();
            let stem = format!("transfer_{}", cfg.channel.from.as_str());
            let files = write_trajectory(&data, &stem, &traj, &params, &window, &cfg.integrator, wall)?;
            out.register(&files[0], Some(TRAJECTORY_PLOT));
            out.register(&files[1], None);
            let _ = write!(
                report,
                "from {} fidelity {:.6} (norm drift {:.1e})",
                cfg.channel.from.as_str(),
                traj.fidelity.unwrap_or(f64::NAN),
                traj.norm_drift
            );
            out.add_cells([single_cell(&stem, start)]);
        }
        CommandKind::Gap => {
            let window = cfg.channel.pump_spec()?;
            let level = match cfg.channel.level {
                Some(k) => k,
                None => channel_level(&params, cfg.channel.name, window.midpoint())?,
            };
            let (lo, hi) = if window.phi_start < window.phi_end {
                (window.phi_start, window.phi_end)
            } else {
                (window.phi_end, window.phi_start)
            };
            let grid = Axis::linear("phi", lo, hi, cfg.scan.phi_points).values();
            let lattice = Lattice::new(params.clone())?;
            let g = min_gap(&lattice, level, &grid)?;
            let mut profile = Table::new(["phi_over_pi", "gap", "bulk"]);
            for &phi in &grid {
                let s = diagonalize(&lattice.hamiltonian_at(phi))?;
                let gap = s
                    .energies
                    .get(level + 1)
                    .map_or(f64::NAN, |e| e - s.energies[level]);
                profile.push(vec![(phi / PI).into(), gap.into(), ((!s.is_edge_state(level)) as usize).into()]);
            }
            let mut table = Table::new(["channel", "V", "level", "delta", "delta_sq", "phi_at_min_over_pi", "bulk_points"]);
            table.push(vec![
                cfg.channel.name.as_str().into(),
                params.v.into(),
                g.level_index.into(),
                g.delta.into(),
                g.delta_sq.into(),
                (g.phi_at_min / PI).into(),
                g.bulk_points.into(),
            ]);
            out.write_table("min_gap.csv", &table, None)?;
            out.write_table("gap_profile.csv", &profile, Some(PlotKind::Lines { x: 1, y: vec![2] }))?;
            let _ = write!(
                report,
                "level {level}: delta = {:.6e}, delta^2 = {:.6e} at phi = {:.4} pi",
                g.delta,
                g.delta_sq,
                g.phi_at_min / PI
            );
            out.add_cells([single_cell("min_gap", start)]);
        }
        CommandKind::VcFind => {
            let selector = match cfg.channel.level {
                Some(k) => LevelSelector::Index(k),
                None => LevelSelector::BulkSubchannel(cfg.channel.name),
            };
            let est = find_sublevel_threshold(
                selector,
                &params,
                (cfg.scan.v_min, cfg.scan.v_max),
                &LocalizationThresholds::default(),
            )?;
            let mut table = Table::new(["level_index", "v_c", "level_energy", "e_c", "local_spacing"]);
            table.push(vec![
                est.level_index.into(),
                est.v_c.into(),
                est.level_energy.into(),
                est.mobility_edge.unwrap_or(f64::NAN).into(),
                est.local_spacing.into(),
            ]);
            out.write_table("vc.csv", &table, None)?;
            let _ = write!(
                report,
                "level {}: V_c = {:.4} (E = {:.4}, E_c(V_c) = {:.4})",
                est.level_index,
                est.v_c,
                est.level_energy,
                est.mobility_edge.unwrap_or(f64::NAN)
            );
            out.add_cells([single_cell("vc-find", start)]);
        }
        CommandKind::Sweep => {
            let q = cfg.sweep.quantity;
            let window = match (cfg.channel.phi_start, cfg.channel.phi_end) {
                (None, None) => None,
                _ => {
                    let spec = if q == crate::experiments::SweepQuantity::TransferFidelity {
                        cfg.channel.transfer_spec()?
                    } else {
                        cfg.channel.pump_spec()?
                    };
                    Some((spec.phi_start, spec.phi_end))
                }
            };
            let task = SweepTask {
                quantity: q,
                params: params.clone(),
                channel: cfg.channel.name,
                from: cfg.channel.from,
                window,
                integrator: cfg.integrator,
            };
            let axes = vec![
                Axis::linear("V", cfg.sweep.v_min, cfg.sweep.v_max, cfg.sweep.v_count),
                q.y_axis(cfg.channel.name, cfg.sweep.y_min, cfg.sweep.y_max, cfg.sweep.y_count),
            ];
            let options = SweepOptions {
                workers: cfg.workers,
                checkpoint: Some(out.checkpoint_path()),
                label: task.label(),
                cell_budget: cfg.sweep.cell_budget,
            };
            let grid = run_sweep(SweepGrid::new(axes)?, |c| task.evaluate(c), &options)?;
            let name = format!("sweep_{}.csv", q.as_str());
            let log_y = q.log_y();
            out.write_table(&name, &grid.to_table(q.value_name()), Some(PlotKind::Map { x: 2, y: 3, value: 4, log_y }))?;
            out.add_grid_cells(q.as_str(), &grid);
            let _ = write!(
                report,
                "{}/{} cells complete, {} failed",
                grid.completed_count(),
                grid.len(),
                grid.failures.len()
            );
        }
        CommandKind::Experiment => unreachable!("handled above"),
    }
    let manifest = out.finish(json!({ "config": echo }), cfg.output.emit_plot_script)?;
    let _ = write!(report, "\nwrote {}", cfg.run_dir().display());
    Ok(Outcome { manifest, report })
}

/// Re-reads every CSV listed in a manifest, returning the tables.
pub fn reread_outputs(run_dir: &std::path::Path, manifest: &Manifest) -> Result<Vec<Table>> {
    manifest
        .files
        .iter()
        .filter(|f| f.ends_with(".csv"))
        .map(|f| super::table::read_csv(&run_dir.join(f)))
        .collect()
}
