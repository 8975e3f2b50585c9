//! Resolved run configuration and the flat `section.key = value` file format.
//!
//! Resolution order is defaults, then the config file, then command-line
//! flags. Phases are written in units of pi everywhere a user types them.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::dynamics::{ChannelSpec, IntegratorConfig, Scheme};
use crate::error::{Error, Result};
use crate::experiments::{ExperimentName, Overrides, SweepQuantity};
use crate::lattice::{Channel, HoppingRange, ModelKind, ModelParams, Side};

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_ENV: &str = "QPT_OUTPUT_ROOT";
pub const DEFAULT_OUTPUT_ROOT: &str = "runs";
pub const DEFAULT_TAG: &str = "default";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Spectrum,
    IprScan,
    Pump,
    Transfer,
    Gap,
    VcFind,
    Experiment,
    Sweep,
}

impl CommandKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandKind::Spectrum => "spectrum",
            CommandKind::IprScan => "ipr-scan",
            CommandKind::Pump => "pump",
            CommandKind::Transfer => "transfer",
            CommandKind::Gap => "gap",
            CommandKind::VcFind => "vc-find",
            CommandKind::Experiment => "experiment",
            CommandKind::Sweep => "sweep",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub u: f64,
    pub v: f64,
    pub zeta: f64,
    /// Phase in units of pi.
    pub phi: f64,
    pub n: usize,
    /// Hopping magnitude below which terms are dropped; `None` keeps all.
    pub cutoff: Option<f64>,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            kind: ModelKind::ExpHopping,
            u: 1.0,
            v: 1.0,
            zeta: ModelParams::<f64>::golden_zeta(),
            phi: 0.99,
            n: 33,
            cutoff: None,
        }
    }
}

impl ModelSection {
    pub fn params(&self) -> ModelParams<f64> {
        ModelParams {
            u: self.u,
            v: self.v,
            zeta: self.zeta,
            phi: self.phi * std::f64::consts::PI,
            n: self.n,
            hopping: self.cutoff.map_or(HoppingRange::Full, HoppingRange::Truncate),
            kind: self.kind,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChannelSection {
    pub name: Channel,
    /// Ramp frequency in units of t1 (phase per unit time).
    pub omega: f64,
    /// Window start in units of pi; `None` uses the channel default.
    pub phi_start: Option<f64>,
    pub phi_end: Option<f64>,
    /// Boundary site that receives the excitation in `transfer`.
    pub from: Side,
    /// Explicit sorted level index for `vc-find` and `gap`.
    pub level: Option<usize>,
}

impl Default for ChannelSection {
    fn default() -> Self {
        ChannelSection {
            name: Channel::A,
            omega: 1e-5,
            phi_start: None,
            phi_end: None,
            from: Side::Left,
            level: None,
        }
    }
}

impl ChannelSection {
    /// Pumping window of the named channel, with any explicit endpoints.
    pub fn pump_spec(&self) -> Result<ChannelSpec<f64>> {
        let base = ChannelSpec::pump(self.name, self.omega)?;
        self.with_endpoints(base)
    }

    /// Shared forward transfer window, with any explicit endpoints.
    pub fn transfer_spec(&self) -> Result<ChannelSpec<f64>> {
        let base = ChannelSpec::transfer_window(self.omega)?;
        self.with_endpoints(base)
    }

    fn with_endpoints(&self, base: ChannelSpec<f64>) -> Result<ChannelSpec<f64>> {
        let pi = std::f64::consts::PI;
        ChannelSpec::new(
            self.phi_start.map_or(base.phi_start, |p| p * pi),
            self.phi_end.map_or(base.phi_end, |p| p * pi),
            self.omega,
        )
    }
}

/// V scan used by `ipr-scan` and as the search range of `vc-find`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanSection {
    pub v_min: f64,
    pub v_max: f64,
    pub v_step: f64,
    /// Phase grid resolution for `gap` and spectrum-vs-phase outputs.
    pub phi_points: usize,
}

impl Default for ScanSection {
    fn default() -> Self {
        ScanSection {
            v_min: 0.5,
            v_max: 4.0,
            v_step: 0.05,
            phi_points: 401,
        }
    }
}

impl ScanSection {
    pub fn v_values(&self) -> Vec<f64> {
        let count = ((self.v_max - self.v_min) / self.v_step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| self.v_min + i as f64 * self.v_step)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSection {
    pub quantity: SweepQuantity,
    pub v_min: f64,
    pub v_max: f64,
    pub v_count: usize,
    /// Second axis: omega for fidelity sweeps, phi (units of pi) for level
    /// sweeps. `None` picks the quantity's default range.
    pub y_min: Option<f64>,
    pub y_max: Option<f64>,
    pub y_count: usize,
    /// Stop after this many new cells (simulates an interruption).
    pub cell_budget: Option<usize>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            quantity: SweepQuantity::PumpFidelity,
            v_min: 0.5,
            v_max: 4.0,
            v_count: 8,
            y_min: None,
            y_max: None,
            y_count: 6,
            cell_budget: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ExperimentSection {
    pub name: Option<ExperimentName>,
    pub overrides: Overrides,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputSection {
    pub root: PathBuf,
    pub tag: String,
    pub emit_plot_script: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        let root = std::env::var_os(OUTPUT_ROOT_ENV)
            .filter(|v| !v.is_empty())
            .map_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT), PathBuf::from);
        OutputSection {
            root,
            tag: DEFAULT_TAG.into(),
            emit_plot_script: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub model: ModelSection,
    pub channel: ChannelSection,
    pub integrator: IntegratorConfig,
    pub scan: ScanSection,
    pub sweep: SweepSection,
    pub experiment: ExperimentSection,
    pub output: OutputSection,
    /// Worker threads for sweeps and experiments.
    pub workers: usize,
    pub config_file: Option<PathBuf>,
}

impl RunConfig {
    pub fn defaults(command: CommandKind) -> Self {
        RunConfig {
            command,
            model: ModelSection::default(),
            channel: ChannelSection::default(),
            integrator: IntegratorConfig::default(),
            scan: ScanSection::default(),
            sweep: SweepSection::default(),
            experiment: ExperimentSection::default(),
            output: OutputSection::default(),
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            config_file: None,
        }
    }

    /// `<root>/<experiment-or-command>/<tag>`.
    pub fn run_dir(&self) -> PathBuf {
        let group = match (self.command, self.experiment.name) {
            (CommandKind::Experiment, Some(name)) => name.as_str(),
            (command, _) => command.as_str(),
        };
        self.output.root.join(group).join(&self.output.tag)
    }

    /// Applies one `section.key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key_lc = key.trim().to_ascii_lowercase();
        let value = value.trim();
        let bad = |e: String| Error::Usage(format!("{key}: {e}"));
        match key_lc.as_str() {
            "model.kind" | "model.model" => self.model.kind = value.parse()?,
            "model.u" => self.model.u = parse(value).map_err(bad)?,
            "model.v" => self.model.v = parse(value).map_err(bad)?,
            "model.zeta" => self.model.zeta = parse(value).map_err(bad)?,
            "model.phi" => self.model.phi = parse(value).map_err(bad)?,
            "model.n" => self.model.n = parse(value).map_err(bad)?,
            "model.cutoff" => self.model.cutoff = parse_opt(value).map_err(bad)?,
            "channel.name" | "channel.channel" => self.channel.name = value.parse()?,
            "channel.omega" => self.channel.omega = parse(value).map_err(bad)?,
            "channel.phi_start" => self.channel.phi_start = parse_opt(value).map_err(bad)?,
            "channel.phi_end" => self.channel.phi_end = parse_opt(value).map_err(bad)?,
            "channel.from" => self.channel.from = value.parse()?,
            "channel.level" => self.channel.level = parse_opt(value).map_err(bad)?,
            "integrator.dt" => self.integrator.dt = parse(value).map_err(bad)?,
            "integrator.max_phase_step" => {
                self.integrator.max_phase_step = parse(value).map_err(bad)?
            }
            "integrator.samples" => self.integrator.sample_count = parse(value).map_err(bad)?,
            "integrator.scheme" => self.integrator.scheme = parse_scheme(value)?,
            "integrator.norm_tolerance" => {
                self.integrator.norm_tolerance = parse(value).map_err(bad)?
            }
            "scan.v_min" => self.scan.v_min = parse(value).map_err(bad)?,
            "scan.v_max" => self.scan.v_max = parse(value).map_err(bad)?,
            "scan.v_step" => self.scan.v_step = parse(value).map_err(bad)?,
            "scan.phi_points" => self.scan.phi_points = parse(value).map_err(bad)?,
            "sweep.quantity" => self.sweep.quantity = value.parse()?,
            "sweep.v_min" => self.sweep.v_min = parse(value).map_err(bad)?,
            "sweep.v_max" => self.sweep.v_max = parse(value).map_err(bad)?,
            "sweep.v_count" => self.sweep.v_count = parse(value).map_err(bad)?,
            "sweep.y_min" => self.sweep.y_min = parse_opt(value).map_err(bad)?,
            "sweep.y_max" => self.sweep.y_max = parse_opt(value).map_err(bad)?,
            "sweep.y_count" => self.sweep.y_count = parse(value).map_err(bad)?,
            "sweep.cell_budget" => self.sweep.cell_budget = parse_opt(value).map_err(bad)?,
            "experiment.name" => self.experiment.name = Some(value.parse()?),
            "experiment.full" => self.experiment.overrides.full = parse(value).map_err(bad)?,
            "experiment.model" => self.experiment.overrides.model = Some(value.parse()?),
            "experiment.v_values" => {
                self.experiment.overrides.v_values = Some(parse_list(value).map_err(bad)?)
            }
            "experiment.n" => self.experiment.overrides.n = parse_opt(value).map_err(bad)?,
            "experiment.omega" => self.experiment.overrides.omega = parse_opt(value).map_err(bad)?,
            "experiment.v_min" => self.experiment.overrides.v_min = parse_opt(value).map_err(bad)?,
            "experiment.v_max" => self.experiment.overrides.v_max = parse_opt(value).map_err(bad)?,
            "experiment.v_count" => {
                self.experiment.overrides.v_count = parse_opt(value).map_err(bad)?
            }
            "experiment.omega_min" => {
                self.experiment.overrides.omega_min = parse_opt(value).map_err(bad)?
            }
            "experiment.omega_max" => {
                self.experiment.overrides.omega_max = parse_opt(value).map_err(bad)?
            }
            "experiment.omega_count" => {
                self.experiment.overrides.omega_count = parse_opt(value).map_err(bad)?
            }
            "experiment.phi_points" => {
                self.experiment.overrides.phi_points = parse_opt(value).map_err(bad)?
            }
            "output.root" | "output.dir" => self.output.root = PathBuf::from(value),
            "output.tag" => self.output.tag = value.to_string(),
            "output.emit_plot_script" => {
                self.output.emit_plot_script = parse(value).map_err(bad)?
            }
            "run.workers" | "workers" => self.workers = parse(value).map_err(bad)?,
            _ => return Err(Error::Usage(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Reads a config file and applies every assignment in order.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for (line_no, key, value) in parse_config_text(path, &text)? {
            self.set(&key, &value).map_err(|e| match e {
                Error::Usage(m) | Error::InvalidParameter(m) => Error::Usage(format!(
                    "{}:{line_no}: {m}",
                    path.display()
                )),
                other => other,
            })?;
        }
        self.config_file = Some(path.to_path_buf());
        Ok(())
    }

    /// Range and consistency checks on the fully resolved configuration.
    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| Err(Error::Usage(m));
        if !(self.channel.omega.is_finite() && self.channel.omega > 0.0) {
            return usage(format!("omega must be positive, got {}", self.channel.omega));
        }
        if let Some(omega) = self.experiment.overrides.omega {
            if !(omega.is_finite() && omega > 0.0) {
                return usage(format!("omega must be positive, got {omega}"));
            }
        }
        if self.model.n < 2 {
            return usage(format!("N must be at least 2, got {}", self.model.n));
        }
        if !(0.0..=2.0).contains(&self.model.phi) {
            return usage(format!(
                "phi is in units of pi and must lie in [0, 2], got {}",
                self.model.phi
            ));
        }
        if self.workers == 0 {
            return usage("workers must be at least 1".into());
        }
        if self.output.tag.is_empty() || self.output.tag.contains(['/', '\\']) {
            return usage(format!(
                "tag must be a non-empty name without path separators, got `{}`",
                self.output.tag
            ));
        }
        if !(self.scan.v_step > 0.0 && self.scan.v_max >= self.scan.v_min) {
            return usage(format!(
                "--v-min/--v-max/--v-step describe an empty scan ({}..{} by {})",
                self.scan.v_min, self.scan.v_max, self.scan.v_step
            ));
        }
        if self.scan.phi_points < 2 {
            return usage("phi-points must be at least 2".into());
        }
        if self.sweep.v_count == 0 || self.sweep.y_count == 0 {
            return usage("sweep axes need at least one point each".into());
        }
        if let (Some(a), Some(b)) = (self.sweep.y_min, self.sweep.y_max) {
            if b < a {
                return usage(format!("--y-min {a} exceeds --y-max {b}"));
            }
        }
        if self.sweep.quantity.log_y() && self.sweep.y_min.is_some_and(|y| y <= 0.0) {
            return usage("omega axis must be positive (--y-min > 0)".into());
        }
        if self.command == CommandKind::Experiment && self.experiment.name.is_none() {
            return usage("experiment requires a name (--name or experiment.name)".into());
        }
        self.model
            .params()
            .validate()
            .map_err(|e| Error::Usage(e.to_string()))?;
        self.integrator
            .validate()
            .map_err(|e| Error::Usage(e.to_string()))?;
        Ok(())
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serde_json::to_string_pretty(self).map_err(|_| fmt::Error)?)
    }
}

fn parse<T: FromStr>(value: &str) -> std::result::Result<T, String>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| format!("cannot parse `{value}`: {e}"))
}

fn parse_opt<T: FromStr>(value: &str) -> std::result::Result<Option<T>, String>
where
    T::Err: fmt::Display,
{
    match value {
        "" | "none" | "default" => Ok(None),
        v => parse(v).map(Some),
    }
}

fn parse_list(value: &str) -> std::result::Result<Vec<f64>, String> {
    value
        .split(',')
        .map(|s| parse::<f64>(s.trim()))
        .collect()
}

pub fn parse_scheme(value: &str) -> Result<Scheme> {
    match value {
        "exp-midpoint" | "exponential-midpoint" | "exp" => Ok(Scheme::ExponentialMidpoint),
        "crank-nicolson" | "cn" => Ok(Scheme::CrankNicolson),
        "magnus4" | "m4" => Ok(Scheme::Magnus4),
        other => Err(Error::Usage(format!(
            "scheme must be `magnus4`, `exp-midpoint` or `crank-nicolson`, got `{other}`"
        ))),
    }
}

/// Splits a config file into `(line number, key, value)` triples.
///
/// Blank lines and lines starting with `#` or `;` are skipped. A
/// `[section]` header prefixes the keys that follow it.
pub fn parse_config_text(path: &Path, text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Format {
                path: path.to_path_buf(),
                message: format!("line {line_no}: expected `key = value`, got `{line}`"),
            });
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Format {
                path: path.to_path_buf(),
                message: format!("line {line_no}: empty key"),
            });
        }
        let key = if section.is_empty() || key.contains('.') {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        let value = value.split(" #").next().unwrap_or("").trim();
        out.push((line_no, key, value.trim_matches('"').to_string()));
    }
    Ok(out)
}
