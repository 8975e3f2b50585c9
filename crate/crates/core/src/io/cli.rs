//! `qpt` argument parsing.
//!
//! Every flag maps onto a [`RunConfig`] field; flags override values read
//! from `--config`, which override the built-in defaults.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::{parse_scheme, CommandKind, RunConfig};
use crate::error::{Error, Result};

const UNITS: &str = "Units: energies and V in units of the nearest-neighbour hopping t1; \
time in units of hbar/t1; phases (phi, window endpoints, phi axes) in units of pi; \
omega in radians per unit time.";

#[derive(Debug, Parser)]
#[command(
    name = "qpt",
    version,
    about = "Localization and adiabatic transport in quasiperiodic lattices with exponentially decaying hopping",
    after_help = UNITS,
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues, IPR, boundary weights and cluster labels at one point.
    #[command(after_help = UNITS)]
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Spectrum and localization labels over a range of V.
    #[command(after_help = UNITS)]
    IprScan {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Adiabatic edge-mode pumping through channel A or B.
    #[command(after_help = UNITS)]
    Pump {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        integrator: IntegratorArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Boundary excitation transfer across the window 0.39 -> 1.39 (units of pi).
    #[command(after_help = UNITS)]
    Transfer {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        channel: ChannelArgs,
        /// Boundary site that receives the excitation: left or right.
        #[arg(long)]
        from: Option<String>,
        #[command(flatten)]
        integrator: IntegratorArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Minimum gap between a channel's bulk subchannel and the level above it.
    #[command(after_help = UNITS)]
    Gap {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        channel: ChannelArgs,
        /// Explicit sorted level index (0-based) instead of the bulk subchannel.
        #[arg(long)]
        level: Option<usize>,
        /// Points on the phase grid across the channel window.
        #[arg(long)]
        phi_points: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Localization threshold V_c of one level by bisection on its IPR.
    #[command(after_help = UNITS)]
    VcFind {
        #[command(flatten)]
        model: ModelArgs,
        /// Bulk subchannel of this channel (A or B).
        #[arg(long, conflicts_with = "level")]
        channel: Option<String>,
        /// Explicit sorted level index (0-based).
        #[arg(long)]
        level: Option<usize>,
        /// Lower end of the V search range [t1].
        #[arg(long = "v-min", allow_negative_numbers = true)]
        v_min: Option<f64>,
        /// Upper end of the V search range [t1].
        #[arg(long = "v-max", allow_negative_numbers = true)]
        v_max: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Regenerate the data behind one figure.
    #[command(after_help = UNITS)]
    Experiment {
        /// fig1_mobility_edge, fig2_spectra_and_pumps, fig3_fidelity_heatmaps,
        /// fig3_min_gaps, fig4_transfer, fig5_transfer_heatmaps or fig5_edge_weights.
        #[arg(long)]
        name: Option<String>,
        #[command(flatten)]
        overrides: OverrideArgs,
        #[command(flatten)]
        integrator: IntegratorArgs,
        /// Evaluate at most this many new sweep cells per grid, then stop.
        #[arg(long)]
        cell_budget: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Resumable parallel sweep over (V, omega) or (V, phi).
    #[command(after_help = UNITS)]
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        channel: ChannelArgs,
        /// Injection side for transfer-fidelity sweeps: left or right.
        #[arg(long)]
        from: Option<String>,
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        integrator: IntegratorArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Default, Args)]
pub struct ModelArgs {
    /// Hamiltonian family: exp-hopping (the sample system) or aa.
    #[arg(long)]
    pub model: Option<String>,
    /// Hopping decay rate u (> 0, dimensionless); t = e^u.
    #[arg(long, allow_negative_numbers = true)]
    pub u: Option<f64>,
    /// Modulation strength V [t1].
    #[arg(long = "V", visible_alias = "v", allow_negative_numbers = true)]
    pub v: Option<f64>,
    /// Modulation frequency zeta (dimensionless; default (sqrt 5 - 1)/2).
    #[arg(long, allow_negative_numbers = true)]
    pub zeta: Option<f64>,
    /// Modulation phase phi [units of pi, 0..2].
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    /// Number of sites N.
    #[arg(long = "N", visible_alias = "n")]
    pub n: Option<usize>,
    /// Drop hopping terms smaller than this magnitude [t1].
    #[arg(long, allow_negative_numbers = true)]
    pub cutoff: Option<f64>,
}

#[derive(Debug, Default, Args)]
pub struct ChannelArgs {
    /// Pumping channel: A (upper gap) or B (lower gap).
    #[arg(long)]
    pub channel: Option<String>,
    /// Ramp frequency omega [rad per hbar/t1]; must be positive.
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Window start phase [units of pi]; defaults to the channel window.
    #[arg(long, allow_negative_numbers = true)]
    pub phi_start: Option<f64>,
    /// Window end phase [units of pi].
    #[arg(long, allow_negative_numbers = true)]
    pub phi_end: Option<f64>,
}

#[derive(Debug, Default, Args)]
pub struct IntegratorArgs {
    /// Time step [hbar/t1].
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    /// Largest phase advance between Hamiltonian refreshes [rad].
    #[arg(long, allow_negative_numbers = true)]
    pub max_phase_step: Option<f64>,
    /// Density snapshots stored per trajectory, endpoints included.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Propagator: magnus4, exp-midpoint or crank-nicolson.
    #[arg(long)]
    pub scheme: Option<String>,
}

#[derive(Debug, Default, Args)]
pub struct ScanArgs {
    /// First V of the scan [t1].
    #[arg(long = "v-min", allow_negative_numbers = true)]
    pub v_min: Option<f64>,
    /// Last V of the scan [t1].
    #[arg(long = "v-max", allow_negative_numbers = true)]
    pub v_max: Option<f64>,
    /// V increment [t1].
    #[arg(long = "v-step", allow_negative_numbers = true)]
    pub v_step: Option<f64>,
}

#[derive(Debug, Default, Args)]
pub struct SweepArgs {
    /// Cell quantity: pump-fidelity, transfer-fidelity, level-gap or level-ipr.
    #[arg(long)]
    pub quantity: Option<String>,
    /// Lower end of the V axis [t1].
    #[arg(long = "v-min", allow_negative_numbers = true)]
    pub v_min: Option<f64>,
    /// Upper end of the V axis [t1].
    #[arg(long = "v-max", allow_negative_numbers = true)]
    pub v_max: Option<f64>,
    /// Points on the V axis (linear).
    #[arg(long = "v-count")]
    pub v_count: Option<usize>,
    /// Lower end of the second axis [omega: rad per hbar/t1, log scale; phi: units of pi].
    #[arg(long = "y-min", allow_negative_numbers = true)]
    pub y_min: Option<f64>,
    /// Upper end of the second axis.
    #[arg(long = "y-max", allow_negative_numbers = true)]
    pub y_max: Option<f64>,
    /// Points on the second axis.
    #[arg(long = "y-count")]
    pub y_count: Option<usize>,
    /// Evaluate at most this many new cells, then stop (resume by rerunning).
    #[arg(long)]
    pub cell_budget: Option<usize>,
}

#[derive(Debug, Default, Args)]
pub struct OverrideArgs {
    /// Site count replacing the figure default (144, 33 or 38).
    #[arg(long = "N", visible_alias = "n")]
    pub n: Option<usize>,
    /// Model family replacing the figure default: exp-hopping or aa.
    #[arg(long)]
    pub model: Option<String>,
    /// Comma-separated V values [t1] replacing the figure's list.
    #[arg(long = "V", visible_alias = "v", value_delimiter = ',', allow_negative_numbers = true)]
    pub v: Option<Vec<f64>>,
    /// Lower end of the V grid [t1].
    #[arg(long = "v-min", allow_negative_numbers = true)]
    pub v_min: Option<f64>,
    /// Upper end of the V grid [t1].
    #[arg(long = "v-max", allow_negative_numbers = true)]
    pub v_max: Option<f64>,
    /// Points on the V grid.
    #[arg(long = "v-count")]
    pub v_count: Option<usize>,
    /// Ramp frequency for trajectory figures [rad per hbar/t1].
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Lower end of the heatmap omega axis [rad per hbar/t1].
    #[arg(long = "omega-min", allow_negative_numbers = true)]
    pub omega_min: Option<f64>,
    /// Upper end of the heatmap omega axis [rad per hbar/t1].
    #[arg(long = "omega-max", allow_negative_numbers = true)]
    pub omega_max: Option<f64>,
    /// Points on the heatmap omega axis (logarithmic).
    #[arg(long = "omega-count")]
    pub omega_count: Option<usize>,
    /// Points on phase grids.
    #[arg(long)]
    pub phi_points: Option<usize>,
    /// Figure-quality grids (slow: hours on one core).
    #[arg(long)]
    pub full: bool,
}

#[derive(Debug, Default, Args)]
pub struct OutputArgs {
    /// Config file of `section.key = value` lines, applied before flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output root; defaults to $QPT_OUTPUT_ROOT, else ./runs.
    #[arg(long = "output-dir")]
    pub output_dir: Option<PathBuf>,
    /// Run name under <output-dir>/<command-or-experiment>/.
    #[arg(long)]
    pub tag: Option<String>,
    /// Also write a gnuplot script next to the data.
    #[arg(long)]
    pub emit_plot_script: bool,
    /// Worker threads for sweeps and experiments.
    #[arg(long)]
    pub workers: Option<usize>,
}

fn set_opt<T: ToString>(cfg: &mut RunConfig, key: &str, value: &Option<T>) -> Result<()> {
    match value {
        Some(v) => cfg.set(key, &v.to_string()),
        None => Ok(()),
    }
}

impl ModelArgs {
    fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        set_opt(cfg, "model.kind", &self.model)?;
        set_opt(cfg, "model.u", &self.u)?;
        set_opt(cfg, "model.v", &self.v)?;
        set_opt(cfg, "model.zeta", &self.zeta)?;
        set_opt(cfg, "model.phi", &self.phi)?;
        set_opt(cfg, "model.n", &self.n)?;
        set_opt(cfg, "model.cutoff", &self.cutoff)
    }
}

impl ChannelArgs {
    fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        set_opt(cfg, "channel.name", &self.channel)?;
        set_opt(cfg, "channel.omega", &self.omega)?;
        set_opt(cfg, "channel.phi_start", &self.phi_start)?;
        set_opt(cfg, "channel.phi_end", &self.phi_end)
    }
}

impl IntegratorArgs {
    fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        if let Some(dt) = self.dt {
            cfg.integrator.dt = dt;
        }
        if let Some(step) = self.max_phase_step {
            cfg.integrator.max_phase_step = step;
        }
        if let Some(samples) = self.samples {
            cfg.integrator.sample_count = samples;
        }
        if let Some(scheme) = &self.scheme {
            cfg.integrator.scheme = parse_scheme(scheme)?;
        }
        Ok(())
    }
}

impl ScanArgs {
    fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        set_opt(cfg, "scan.v_min", &self.v_min)?;
        set_opt(cfg, "scan.v_max", &self.v_max)?;
        set_opt(cfg, "scan.v_step", &self.v_step)
    }
}

impl SweepArgs {
    fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        set_opt(cfg, "sweep.quantity", &self.quantity)?;
        set_opt(cfg, "sweep.v_min", &self.v_min)?;
        set_opt(cfg, "sweep.v_max", &self.v_max)?;
        set_opt(cfg, "sweep.v_count", &self.v_count)?;
        set_opt(cfg, "sweep.y_min", &self.y_min)?;
        set_opt(cfg, "sweep.y_max", &self.y_max)?;
        set_opt(cfg, "sweep.y_count", &self.y_count)?;
        set_opt(cfg, "sweep.cell_budget", &self.cell_budget)
    }
}

impl OverrideArgs {
    fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        let o = &mut cfg.experiment.overrides;
        if let Some(n) = self.n {
            o.n = Some(n);
        }
        if let Some(model) = &self.model {
            o.model = Some(model.parse()?);
        }
        if let Some(v) = &self.v {
            o.v_values = Some(v.clone());
        }
        macro_rules! copy {
            ($($f:ident),*) => {$( if self.$f.is_some() { o.$f = self.$f; } )*};
        }
        copy!(v_min, v_max, v_count, omega, omega_min, omega_max, omega_count, phi_points);
        if self.full {
            o.full = true;
        }
        Ok(())
    }
}

impl OutputArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(dir) = &self.output_dir {
            cfg.output.root = dir.clone();
        }
        if let Some(tag) = &self.tag {
            cfg.output.tag = tag.clone();
        }
        if self.emit_plot_script {
            cfg.output.emit_plot_script = true;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
    }
}

impl Command {
    pub fn kind(&self) -> CommandKind {
        match self {
            Command::Spectrum { .. } => CommandKind::Spectrum,
            Command::IprScan { .. } => CommandKind::IprScan,
            Command::Pump { .. } => CommandKind::Pump,
            Command::Transfer { .. } => CommandKind::Transfer,
            Command::Gap { .. } => CommandKind::Gap,
            Command::VcFind { .. } => CommandKind::VcFind,
            Command::Experiment { .. } => CommandKind::Experiment,
            Command::Sweep { .. } => CommandKind::Sweep,
        }
    }

    fn output(&self) -> &OutputArgs {
        match self {
            Command::Spectrum { output, .. }
            | Command::IprScan { output, .. }
            | Command::Pump { output, .. }
            | Command::Transfer { output, .. }
            | Command::Gap { output, .. }
            | Command::VcFind { output, .. }
            | Command::Experiment { output, .. }
            | Command::Sweep { output, .. } => output,
        }
    }
}

impl Cli {
    /// Defaults, then the config file, then flags; validated.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::defaults(self.command.kind());
        let output = self.command.output();
        if let Some(path) = &output.config {
            cfg.apply_file(path)?;
        }
        output.apply(&mut cfg);
        match &self.command {
            Command::Spectrum { model, .. } => model.apply(&mut cfg)?,
            Command::IprScan { model, scan, .. } => {
                model.apply(&mut cfg)?;
                scan.apply(&mut cfg)?;
            }
            Command::Pump {
                model,
                channel,
                integrator,
                ..
            } => {
                model.apply(&mut cfg)?;
                channel.apply(&mut cfg)?;
                integrator.apply(&mut cfg)?;
            }
            Command::Transfer {
                model,
                channel,
                from,
                integrator,
                ..
            } => {
                model.apply(&mut cfg)?;
                channel.apply(&mut cfg)?;
                set_opt(&mut cfg, "channel.from", from)?;
                integrator.apply(&mut cfg)?;
            }
            Command::Gap {
                model,
                channel,
                level,
                phi_points,
                ..
            } => {
                model.apply(&mut cfg)?;
                channel.apply(&mut cfg)?;
                set_opt(&mut cfg, "channel.level", level)?;
                set_opt(&mut cfg, "scan.phi_points", phi_points)?;
            }
            Command::VcFind {
                model,
                channel,
                level,
                v_min,
                v_max,
                ..
            } => {
                model.apply(&mut cfg)?;
                set_opt(&mut cfg, "channel.name", channel)?;
                set_opt(&mut cfg, "channel.level", level)?;
                set_opt(&mut cfg, "scan.v_min", v_min)?;
                set_opt(&mut cfg, "scan.v_max", v_max)?;
            }
            Command::Experiment {
                name,
                overrides,
                integrator,
                cell_budget,
                ..
            } => {
                set_opt(&mut cfg, "experiment.name", name)?;
                overrides.apply(&mut cfg)?;
                integrator.apply(&mut cfg)?;
                set_opt(&mut cfg, "sweep.cell_budget", cell_budget)?;
            }
            Command::Sweep {
                model,
                channel,
                from,
                sweep,
                integrator,
                ..
            } => {
                model.apply(&mut cfg)?;
                channel.apply(&mut cfg)?;
                set_opt(&mut cfg, "channel.from", from)?;
                sweep.apply(&mut cfg)?;
                integrator.apply(&mut cfg)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `argv` (program name first) into a validated [`RunConfig`].
pub fn parse_cli<I, S>(argv: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    cli.resolve().map_err(|e| match e {
        Error::InvalidParameter(m) => Error::Usage(m),
        other => other,
    })
}
