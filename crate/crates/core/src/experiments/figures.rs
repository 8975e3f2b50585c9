//! Named pipelines that regenerate the data behind each figure.

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;

use super::manifest::{run_cells, CellRecord, Manifest, RunOutput};
use super::sweep::{run_sweep, Axis, SweepGrid, SweepOptions};
use super::tasks::{channel_level, SweepQuantity, SweepTask};
use crate::dynamics::{
    find_edge_mode, min_gap, pump_edge_mode, transfer_excitation, ChannelSpec, IntegratorConfig,
    StageProfile,
};
use crate::error::{Error, Result};
use crate::io::formats::{write_json, write_trajectory};
use crate::io::plot::PlotKind;
use crate::io::table::{Cell, Table};
use crate::lattice::{
    diagonalize, find_sublevel_threshold, Channel, Lattice, LevelSelector, LocalizationThresholds,
    MobilityEdgeLine, ModelKind, ModelParams, Side,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentName {
    Fig1MobilityEdge,
    Fig2SpectraAndPumps,
    Fig3FidelityHeatmaps,
    Fig3MinGaps,
    Fig4Transfer,
    Fig5TransferHeatmaps,
    Fig5EdgeWeights,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 7] = [
        ExperimentName::Fig1MobilityEdge,
        ExperimentName::Fig2SpectraAndPumps,
        ExperimentName::Fig3FidelityHeatmaps,
        ExperimentName::Fig3MinGaps,
        ExperimentName::Fig4Transfer,
        ExperimentName::Fig5TransferHeatmaps,
        ExperimentName::Fig5EdgeWeights,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::Fig1MobilityEdge => "fig1_mobility_edge",
            ExperimentName::Fig2SpectraAndPumps => "fig2_spectra_and_pumps",
            ExperimentName::Fig3FidelityHeatmaps => "fig3_fidelity_heatmaps",
            ExperimentName::Fig3MinGaps => "fig3_min_gaps",
            ExperimentName::Fig4Transfer => "fig4_transfer",
            ExperimentName::Fig5TransferHeatmaps => "fig5_transfer_heatmaps",
            ExperimentName::Fig5EdgeWeights => "fig5_edge_weights",
        }
    }

    /// Default site count of the figure.
    pub fn default_n(self) -> usize {
        match self {
            ExperimentName::Fig1MobilityEdge => 144,
            ExperimentName::Fig2SpectraAndPumps
            | ExperimentName::Fig3FidelityHeatmaps
            | ExperimentName::Fig3MinGaps => 33,
            ExperimentName::Fig4Transfer
            | ExperimentName::Fig5TransferHeatmaps
            | ExperimentName::Fig5EdgeWeights => 38,
        }
    }
}

impl std::str::FromStr for ExperimentName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|e| e.as_str()).collect();
                Error::Usage(format!(
                    "unknown experiment `{s}`; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

/// Parameter overrides; `None` keeps the figure's default.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Overrides {
    pub n: Option<usize>,
    pub model: Option<ModelKind>,
    /// Explicit V list for line and spot-check experiments.
    pub v_values: Option<Vec<f64>>,
    pub v_min: Option<f64>,
    pub v_max: Option<f64>,
    pub v_count: Option<usize>,
    /// Ramp frequency for trajectory experiments.
    pub omega: Option<f64>,
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub omega_count: Option<usize>,
    pub phi_points: Option<usize>,
    /// Figure-quality resolution instead of desk scale.
    pub full: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub name: ExperimentName,
    pub overrides: Overrides,
    /// Run directory, `<root>/<experiment>/<tag>`.
    pub output_dir: PathBuf,
    pub integrator: IntegratorConfig,
    pub workers: usize,
    /// Per-sweep limit on newly evaluated cells.
    pub cell_budget: Option<usize>,
    pub emit_plot_script: bool,
}

impl ExperimentSpec {
    pub fn new(name: ExperimentName, output_dir: PathBuf) -> Self {
        ExperimentSpec {
            name,
            overrides: Overrides::default(),
            output_dir,
            integrator: IntegratorConfig::default(),
            workers: 1,
            cell_budget: None,
            emit_plot_script: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let o = &self.overrides;
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if o.n.is_some_and(|n| n < 2) {
            return bad("N must be at least 2".into());
        }
        for (label, w) in [("omega", o.omega), ("omega-min", o.omega_min), ("omega-max", o.omega_max)] {
            if w.is_some_and(|w| !(w.is_finite() && w > 0.0)) {
                return bad(format!("{label} must be positive"));
            }
        }
        if o.v_count == Some(0) || o.omega_count == Some(0) {
            return bad("grid counts must be at least 1".into());
        }
        if o.phi_points.is_some_and(|p| p < 2) {
            return bad("phi-points must be at least 2".into());
        }
        if let Some(vs) = &o.v_values {
            if vs.is_empty() || vs.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return bad("V values must be finite and non-negative".into());
            }
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        self.integrator.validate()
    }

    fn n(&self) -> usize {
        self.overrides.n.unwrap_or(self.name.default_n())
    }

    fn omega(&self) -> f64 {
        self.overrides.omega.unwrap_or(1e-5)
    }

    fn phi_points(&self, desk: usize, full: usize) -> usize {
        self.overrides
            .phi_points
            .unwrap_or(if self.overrides.full { full } else { desk })
    }

    /// Explicit V list, else a uniform grid with the given defaults.
    fn v_list(&self, min: f64, max: f64, desk: usize, full: usize) -> Vec<f64> {
        let o = &self.overrides;
        o.v_values.clone().unwrap_or_else(|| {
            let count = o.v_count.unwrap_or(if o.full { full } else { desk });
            Axis::linear("V", o.v_min.unwrap_or(min), o.v_max.unwrap_or(max), count).values()
        })
    }

    fn heatmap_axes(&self) -> Vec<Axis> {
        let o = &self.overrides;
        let (vc, wc) = if o.full { (25, 20) } else { (8, 6) };
        vec![
            Axis::linear(
                "V",
                o.v_min.unwrap_or(0.5),
                o.v_max.unwrap_or(4.0),
                o.v_count.unwrap_or(vc),
            ),
            Axis::log(
                "omega",
                o.omega_min.unwrap_or(1e-6),
                o.omega_max.unwrap_or(1e-3),
                o.omega_count.unwrap_or(wc),
            ),
        ]
    }

    fn base_params(&self, kind: ModelKind, phi: f64) -> ModelParams<f64> {
        ModelParams {
            kind,
            ..ModelParams::sample(1.0, phi, self.n())
        }
    }
}

fn model_tag(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::Aa => "aa",
        ModelKind::ExpHopping => "sample",
    }
}

fn panel_tag(kind: ModelKind, v: f64) -> String {
    format!("{}_V{v}", model_tag(kind))
}

type Artifacts = Vec<(String, Option<PlotKind>)>;

/// Runs one experiment into `spec.output_dir` and writes its manifest.
///
/// Numerical failures are recorded per cell; only I/O errors abort.
pub fn run_experiment(spec: &ExperimentSpec, config_echo: serde_json::Value) -> Result<Manifest> {
    spec.validate()?;
    let mut out = RunOutput::new(&spec.output_dir, spec.name.as_str())?;
    match spec.name {
        ExperimentName::Fig1MobilityEdge => fig1(spec, &mut out)?,
        ExperimentName::Fig2SpectraAndPumps => fig2(spec, &mut out)?,
        ExperimentName::Fig3FidelityHeatmaps => {
            let kinds = spec
                .overrides
                .model
                .map_or(vec![ModelKind::Aa, ModelKind::ExpHopping], |k| vec![k]);
            let mut jobs = Vec::new();
            for kind in kinds {
                for ch in [Channel::A, Channel::B] {
                    jobs.push((kind, ch, Side::Left, format!("fidelity_{}_{}", model_tag(kind), ch.as_str())));
                }
            }
            heatmaps(spec, &mut out, SweepQuantity::PumpFidelity, jobs)?
        }
        ExperimentName::Fig3MinGaps => fig3_min_gaps(spec, &mut out)?,
        ExperimentName::Fig4Transfer => fig4(spec, &mut out)?,
        ExperimentName::Fig5TransferHeatmaps => {
            let kind = spec.overrides.model.unwrap_or(ModelKind::ExpHopping);
            let jobs = vec![
                (kind, Channel::A, Side::Left, "transfer_A".to_string()),
                (kind, Channel::B, Side::Right, "transfer_B".to_string()),
            ];
            heatmaps(spec, &mut out, SweepQuantity::TransferFidelity, jobs)?
        }
        ExperimentName::Fig5EdgeWeights => fig5_edge_weights(spec, &mut out)?,
    }
    let parameters = json!({
        "spec": spec,
        "config": config_echo,
    });
    let emit = spec.emit_plot_script;
    out.finish(parameters, emit)
}

fn register_all(out: &mut RunOutput, results: &[(CellRecord, Option<Artifacts>)]) {
    for (_, files) in results {
        for (name, plot) in files.iter().flatten() {
            out.register(name, plot.clone());
        }
    }
    out.add_cells(results.iter().map(|(c, _)| c.clone()));
}

fn fig1(spec: &ExperimentSpec, out: &mut RunOutput) -> Result<()> {
    let kind = spec.overrides.model.unwrap_or(ModelKind::ExpHopping);
    let base = spec.base_params(kind, 0.99 * PI);
    let vs = spec.v_list(0.1, 4.0, 40, 196);
    let thresholds = LocalizationThresholds::default();
    let line = MobilityEdgeLine::new(base.u)?;
    let labels = vs.iter().map(|v| format!("spectrum V={v}")).collect();
    let spectra = run_cells(spec.workers, labels, |i| {
        let p = base.with_v(vs[i]);
        diagonalize(&Lattice::new(p)?.hamiltonian())
    })?;
    let mut table = Table::new(["V", "index", "energy", "ipr", "localization", "edge", "e_c"]);
    table.comment(format!("u = {}, phi = 0.99 pi, N = {}, model = {}", base.u, base.n, kind.as_str()));
    for (v, (_, s)) in vs.iter().zip(&spectra) {
        let Some(s) = s else { continue };
        let e_c = line.evaluate(*v);
        for k in 0..s.len() {
            table.push(vec![
                Cell::Float(*v),
                k.into(),
                s.energies[k].into(),
                s.ipr[k].into(),
                thresholds.classify(s.ipr[k], s.len()).as_str().into(),
                (s.is_edge_state(k) as usize).into(),
                e_c.into(),
            ]);
        }
    }
    out.write_table("spectrum_vs_v.csv", &table, Some(PlotKind::Scatter { x: 1, y: 3, color: 4 }))?;
    out.add_cells(spectra.into_iter().map(|(c, _)| c));

    let channels = [Channel::A, Channel::B];
    let labels = channels.iter().map(|c| format!("threshold channel {}", c.as_str())).collect();
    let found = run_cells(spec.workers, labels, |i| {
        find_sublevel_threshold(
            LevelSelector::BulkSubchannel(channels[i]),
            &base,
            (0.5, 4.0),
            &thresholds,
        )
    })?;
    let mut table = Table::new(["channel", "level_index", "v_c", "level_energy", "e_c", "local_spacing"]);
    for (ch, (_, est)) in channels.iter().zip(&found) {
        if let Some(est) = est {
            table.push(vec![
                ch.as_str().into(),
                est.level_index.into(),
                est.v_c.into(),
                est.level_energy.into(),
                est.mobility_edge.unwrap_or(f64::NAN).into(),
                est.local_spacing.into(),
            ]);
        }
    }
    out.write_table("thresholds.csv", &table, None)?;
    out.add_cells(found.into_iter().map(|(c, _)| c));
    Ok(())
}

/// Spectrum on a uniform phase grid over [0, 2 pi].
fn spectrum_vs_phi(params: &ModelParams<f64>, points: usize) -> Result<Table> {
    let lattice = Lattice::new(params.clone())?;
    let mut t = Table::new(["phi_over_pi", "index", "energy", "ipr", "bw_left", "bw_right"]);
    for phi_pi in Axis::linear("phi", 0.0, 2.0, points).values() {
        let s = diagonalize(&lattice.hamiltonian_at(phi_pi * PI))?;
        for k in 0..s.len() {
            t.push(vec![
                phi_pi.into(),
                k.into(),
                s.energies[k].into(),
                s.ipr[k].into(),
                s.boundary_weight_left[k].into(),
                s.boundary_weight_right[k].into(),
            ]);
        }
    }
    Ok(t)
}

fn write_phi_spectrum(
    dir: &std::path::Path,
    stem: &str,
    params: &ModelParams<f64>,
    points: usize,
) -> Result<Artifacts> {
    let table = spectrum_vs_phi(params, points)?;
    let csv = format!("{stem}.csv");
    let sidecar = format!("{stem}.json");
    crate::io::table::write_csv(&dir.join(&csv), &table)?;
    write_json(&dir.join(&sidecar), &json!({ "params": params, "phi_points": points }))?;
    Ok(vec![
        (csv, Some(PlotKind::Scatter { x: 1, y: 3, color: 4 })),
        (sidecar, None),
    ])
}

const TRAJECTORY_PLOT: PlotKind = PlotKind::Map {
    x: 1,
    y: 2,
    value: 3,
    log_y: false,
};

fn fig2(spec: &ExperimentSpec, out: &mut RunOutput) -> Result<()> {
    let panels: Vec<(ModelKind, f64)> = match &spec.overrides.v_values {
        Some(vs) => {
            let kind = spec.overrides.model.unwrap_or(ModelKind::Aa);
            vs.iter().map(|&v| (kind, v)).collect()
        }
        None => vec![
            (ModelKind::Aa, 1.0),
            (ModelKind::Aa, 3.0),
            (ModelKind::ExpHopping, 3.0),
        ],
    };
    let points = spec.phi_points(201, 801);
    let omega = spec.omega();
    let data = out.data_dir();
    let mut labels = Vec::new();
    for &(kind, v) in &panels {
        let tag = panel_tag(kind, v);
        labels.push(format!("{tag} spectrum"));
        labels.push(format!("{tag} pump A"));
        labels.push(format!("{tag} pump B"));
    }
    let results = run_cells(spec.workers, labels, |i| -> Result<(Artifacts, Option<Vec<Cell>>)> {
        let (kind, v) = panels[i / 3];
        let tag = panel_tag(kind, v);
        let params = spec.base_params(kind, 0.99 * PI).with_v(v);
        match i % 3 {
            0 => Ok((write_phi_spectrum(&data, &format!("spectrum_vs_phi_{tag}"), &params, points)?, None)),
            slot => {
                let channel = if slot == 1 { Channel::A } else { Channel::B };
                let mut window = ChannelSpec::pump(channel, omega)?;
                window.resolve_level(&params, channel).ok();
                let start = std::time::Instant::now();
                let outcome = pump_edge_mode(&params, channel, &window, &spec.integrator)?;
                let wall = start.elapsed().as_secs_f64();
                let stem = format!("pump_{}_{tag}", channel.as_str());
                let files = write_trajectory(&data, &stem, &outcome.trajectory, &params, &window, &spec.integrator, wall)?;
                let profile = StageProfile::of(&outcome.trajectory);
                let row = vec![
                    model_tag(kind).into(),
                    v.into(),
                    channel.as_str().into(),
                    outcome.fidelity().into(),
                    outcome.trajectory.norm_drift.into(),
                    profile.early_left_weight.into(),
                    profile.middle_min_ipr.into(),
                    profile.late_right_weight.into(),
                ];
                let artifacts = vec![
                    (files[0].clone(), Some(TRAJECTORY_PLOT)),
                    (files[1].clone(), None),
                ];
                Ok((artifacts, Some(row)))
            }
        }
    })?;
    let mut summary = Table::new([
        "model", "V", "channel", "fidelity", "norm_drift", "early_left_weight",
        "middle_min_ipr", "late_right_weight",
    ]);
    summary.comment(format!("N = {}, omega = {omega:?}", spec.n()));
    let mut registered = Vec::new();
    for (record, value) in results {
        let files = value.map(|(files, row)| {
            if let Some(row) = row {
                summary.push(row);
            }
            files
        });
        registered.push((record, files));
    }
    register_all(out, &registered);
    out.write_table("pump_summary.csv", &summary, None)
}

fn heatmaps(
    spec: &ExperimentSpec,
    out: &mut RunOutput,
    quantity: SweepQuantity,
    jobs: Vec<(ModelKind, Channel, Side, String)>,
) -> Result<()> {
    for (kind, channel, from, stem) in jobs {
        let task = SweepTask {
            quantity,
            params: spec.base_params(kind, 0.99 * PI),
            channel,
            from,
            window: None,
            integrator: spec.integrator,
        };
        let grid = SweepGrid::new(spec.heatmap_axes())?;
        let options = SweepOptions {
            workers: spec.workers,
            checkpoint: Some(out.checkpoint_path()),
            label: task.label(),
            cell_budget: spec.cell_budget,
        };
        let grid = run_sweep(grid, |c| task.evaluate(c), &options)?;
        let mut table = grid.to_table(quantity.value_name());
        table.comment(format!(
            "{} channel {} from {} N = {}",
            model_tag(kind),
            channel.as_str(),
            from.as_str(),
            spec.n()
        ));
        out.write_table(
            &format!("{stem}.csv"),
            &table,
            Some(PlotKind::Map {
                x: 2,
                y: 3,
                value: 4,
                log_y: true,
            }),
        )?;
        out.add_grid_cells(&stem, &grid);
    }
    Ok(())
}

fn fig3_min_gaps(spec: &ExperimentSpec, out: &mut RunOutput) -> Result<()> {
    let kinds = spec
        .overrides
        .model
        .map_or(vec![ModelKind::Aa, ModelKind::ExpHopping], |k| vec![k]);
    let vs = spec.v_list(0.5, 4.0, 71, 176);
    let points = spec.phi_points(401, 1601);
    let mut cells = Vec::new();
    for &kind in &kinds {
        for ch in [Channel::A, Channel::B] {
            for &v in &vs {
                cells.push((kind, ch, v));
            }
        }
    }
    let labels = cells
        .iter()
        .map(|(k, c, v)| format!("{} {} V={v}", model_tag(*k), c.as_str()))
        .collect();
    let results = run_cells(spec.workers, labels, |i| {
        let (kind, ch, v) = cells[i];
        let params = spec.base_params(kind, 0.99 * PI).with_v(v);
        let level = channel_level(&params, ch, 0.99 * PI)?;
        let (a, b) = match ch {
            Channel::A => (0.39, 1.59),
            Channel::B => (0.59, 1.39),
        };
        let grid: Vec<f64> = Axis::linear("phi", a * PI, b * PI, points).values();
        min_gap(&Lattice::new(params)?, level, &grid)
    })?;
    let mut table = Table::new([
        "model", "channel", "V", "level", "delta", "delta_sq", "phi_at_min_over_pi", "bulk_points",
    ]);
    table.comment(format!("N = {}, level resolved at phi = 0.99 pi, phi points = {points}", spec.n()));
    for ((kind, ch, v), (_, gap)) in cells.iter().zip(&results) {
        let Some(g) = gap else { continue };
        table.push(vec![
            model_tag(*kind).into(),
            ch.as_str().into(),
            (*v).into(),
            g.level_index.into(),
            g.delta.into(),
            g.delta_sq.into(),
            (g.phi_at_min / PI).into(),
            g.bulk_points.into(),
        ]);
    }
    out.write_table("min_gaps.csv", &table, Some(PlotKind::Scatter { x: 3, y: 6, color: 4 }))?;
    out.add_cells(results.into_iter().map(|(c, _)| c));
    Ok(())
}

fn fig4(spec: &ExperimentSpec, out: &mut RunOutput) -> Result<()> {
    let kind = spec.overrides.model.unwrap_or(ModelKind::ExpHopping);
    let vs = spec.overrides.v_values.clone().unwrap_or_else(|| vec![1.4, 3.0]);
    let points = spec.phi_points(201, 801);
    let omega = spec.omega();
    let data = out.data_dir();
    let mut labels = Vec::new();
    for &v in &vs {
        let tag = panel_tag(kind, v);
        labels.push(format!("{tag} spectrum"));
        labels.push(format!("{tag} transfer from left"));
        labels.push(format!("{tag} transfer from right"));
    }
    let results = run_cells(spec.workers, labels, |i| -> Result<(Artifacts, Option<Vec<Cell>>)> {
        let v = vs[i / 3];
        let tag = panel_tag(kind, v);
        let params = spec.base_params(kind, 0.99 * PI).with_v(v);
        if i % 3 == 0 {
            return Ok((write_phi_spectrum(&data, &format!("spectrum_vs_phi_{tag}"), &params, points)?, None));
        }
        let from = if i % 3 == 1 { Side::Left } else { Side::Right };
        let window = ChannelSpec::transfer_window(omega)?;
        let start = std::time::Instant::now();
        let traj = transfer_excitation(&params, &window, from, &spec.integrator)?;
        let wall = start.elapsed().as_secs_f64();
        let stem = format!("transfer_{}_{tag}", from.as_str());
        let files = write_trajectory(&data, &stem, &traj, &params, &window, &spec.integrator, wall)?;
        let row = vec![
            v.into(),
            from.as_str().into(),
            traj.fidelity.unwrap_or(f64::NAN).into(),
            traj.norm_drift.into(),
        ];
        Ok((
            vec![(files[0].clone(), Some(TRAJECTORY_PLOT)), (files[1].clone(), None)],
            Some(row),
        ))
    })?;
    let mut summary = Table::new(["V", "from", "fidelity", "norm_drift"]);
    summary.comment(format!("N = {}, omega = {omega:?}, window 0.39 pi -> 1.39 pi", spec.n()));
    let mut registered = Vec::new();
    for (record, value) in results {
        let files = value.map(|(files, row)| {
            if let Some(row) = row {
                summary.push(row);
            }
            files
        });
        registered.push((record, files));
    }
    register_all(out, &registered);
    out.write_table("transfer_summary.csv", &summary, None)
}

/// Endpoint edge modes of both channels, as in the boundary-amplitude plots.
const EDGE_PROBES: [(&str, Channel, f64, Side); 4] = [
    ("a_left_psi1", Channel::A, 0.39, Side::Left),
    ("a_right_psiN", Channel::A, 1.39, Side::Right),
    ("b_right_psiN", Channel::B, 0.39, Side::Right),
    ("b_left_psi1", Channel::B, 1.39, Side::Left),
];

fn fig5_edge_weights(spec: &ExperimentSpec, out: &mut RunOutput) -> Result<()> {
    let kind = spec.overrides.model.unwrap_or(ModelKind::ExpHopping);
    let vs = spec.v_list(0.5, 3.0, 26, 101);
    let mut labels = Vec::new();
    for &v in &vs {
        for (name, ..) in EDGE_PROBES {
            labels.push(format!("{name} V={v}"));
        }
    }
    let results = run_cells(spec.workers, labels, |i| {
        let v = vs[i / EDGE_PROBES.len()];
        let (_, channel, phi_pi, side) = EDGE_PROBES[i % EDGE_PROBES.len()];
        let lattice = Lattice::new(spec.base_params(kind, phi_pi * PI).with_v(v))?;
        let mode = find_edge_mode(&lattice, phi_pi * PI, channel, side)?;
        let site = match side {
            Side::Left => 0,
            Side::Right => mode.state.len() - 1,
        };
        Ok(mode.state[site].abs())
    })?;
    let mut columns = vec!["V"];
    columns.extend(EDGE_PROBES.iter().map(|p| p.0));
    let mut table = Table::new(columns);
    table.comment(format!(
        "N = {}; |psi_1| or |psi_N| of the edge mode on the named side at 0.39 pi or 1.39 pi",
        spec.n()
    ));
    for (row_idx, &v) in vs.iter().enumerate() {
        let mut row = vec![Cell::Float(v)];
        for j in 0..EDGE_PROBES.len() {
            let value = results[row_idx * EDGE_PROBES.len() + j].1;
            row.push(value.unwrap_or(f64::NAN).into());
        }
        table.push(row);
    }
    out.write_table(
        "edge_weights.csv",
        &table,
        Some(PlotKind::Lines {
            x: 1,
            y: vec![2, 3, 4, 5],
        }),
    )?;
    out.add_cells(results.into_iter().map(|(c, _)| c));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in ExperimentName::ALL {
            assert_eq!(e.as_str().parse::<ExperimentName>().unwrap(), e);
            assert_eq!(serde_json::to_value(e).unwrap(), e.as_str());
        }
        assert!("fig9".parse::<ExperimentName>().is_err());
    }

    #[test]
    fn paper_defaults() {
        assert_eq!(ExperimentName::Fig1MobilityEdge.default_n(), 144);
        assert_eq!(ExperimentName::Fig2SpectraAndPumps.default_n(), 33);
        assert_eq!(ExperimentName::Fig4Transfer.default_n(), 38);
        let spec = ExperimentSpec::new(ExperimentName::Fig3FidelityHeatmaps, "x".into());
        assert_eq!(spec.omega(), 1e-5);
        let axes = spec.heatmap_axes();
        assert_eq!((axes[0].count, axes[1].count), (8, 6));
        assert_eq!((axes[1].min, axes[1].max), (1e-6, 1e-3));
    }

    #[test]
    fn edge_weights_small_run() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = ExperimentSpec::new(ExperimentName::Fig5EdgeWeights, dir.path().join("e/t"));
        spec.overrides.v_values = Some(vec![1.0, 2.0]);
        let m = run_experiment(&spec, json!({})).unwrap();
        assert_eq!(m.files, vec!["data/edge_weights.csv"]);
        let t = crate::io::table::read_csv(&dir.path().join("e/t/data/edge_weights.csv")).unwrap();
        let a = t.floats("a_left_psi1").unwrap();
        assert!(a[1] > a[0], "{a:?}");
    }
}
