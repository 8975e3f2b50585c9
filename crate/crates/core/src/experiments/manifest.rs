//! Run directories and their `manifest.json`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::sweep::SweepGrid;
use crate::error::{Error, Result};
use crate::io::formats::{write_json, TOOL_VERSION};
use crate::io::plot::{plot_script, PlotKind};
use crate::io::table::{write_csv, Table};

pub const DETERMINISM_NOTE: &str =
    "no random numbers are used; an identical specification reproduces byte-identical CSV files";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellRecord {
    pub label: String,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub wall_time_s: f64,
}

impl CellRecord {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub tag: String,
    pub tool_version: &'static str,
    pub determinism: &'static str,
    pub parameters: serde_json::Value,
    pub files: Vec<String>,
    pub cells: Vec<CellRecord>,
    pub failed_cells: usize,
    pub wall_time_s: f64,
}

/// Collects the artifacts of one run below `<dir>/data/`.
#[derive(Debug)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub experiment: String,
    pub tag: String,
    files: Vec<String>,
    plots: Vec<(String, PlotKind)>,
    pub cells: Vec<CellRecord>,
    started: Instant,
}

impl RunOutput {
    pub fn new(dir: &Path, experiment: &str) -> Result<Self> {
        let data = dir.join("data");
        std::fs::create_dir_all(&data).map_err(|e| Error::io(&data, e))?;
        let tag = dir
            .file_name()
            .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        Ok(RunOutput {
            dir: dir.to_path_buf(),
            experiment: experiment.into(),
            tag,
            files: Vec::new(),
            plots: Vec::new(),
            cells: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn data_dir(&self) -> PathBuf {
        self.dir.join("data")
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.dir.join("checkpoint.jsonl")
    }

    /// Writes `data/<name>` and registers it for the manifest.
    pub fn write_table(&mut self, name: &str, table: &Table, plot: Option<PlotKind>) -> Result<()> {
        write_csv(&self.data_dir().join(name), table)?;
        self.register(name, plot);
        Ok(())
    }

    /// Registers a file already written into `data/`.
    pub fn register(&mut self, name: &str, plot: Option<PlotKind>) {
        let rel = format!("data/{name}");
        if let Some(kind) = plot {
            self.plots.push((rel.clone(), kind));
        }
        self.files.push(rel);
    }

    pub fn add_cells(&mut self, cells: impl IntoIterator<Item = CellRecord>) {
        self.cells.extend(cells);
    }

    /// Adds one record per sweep cell.
    pub fn add_grid_cells(&mut self, prefix: &str, grid: &SweepGrid) {
        for cell in 0..grid.len() {
            let coords: Vec<String> = grid
                .axes
                .iter()
                .zip(grid.coords(cell))
                .map(|(a, x)| format!("{}={x:?}", a.name))
                .collect();
            let (status, error) = match (grid.failures.get(&cell), grid.completed[cell]) {
                (Some(e), _) => ("failed", Some(e.clone())),
                (None, true) => ("ok", None),
                (None, false) => ("pending", None),
            };
            self.cells.push(CellRecord {
                label: format!("{prefix} {}", coords.join(" ")),
                status,
                error,
                wall_time_s: grid.wall_times[cell],
            });
        }
    }

    /// Writes `manifest.json` (and `plot.gp` when asked) and returns the
    /// manifest.
    pub fn finish(self, parameters: serde_json::Value, emit_plot_script: bool) -> Result<Manifest> {
        let mut files = self.files;
        if emit_plot_script && !self.plots.is_empty() {
            let path = self.dir.join("plot.gp");
            std::fs::write(&path, plot_script(&self.plots)).map_err(|e| Error::io(&path, e))?;
            files.push("plot.gp".into());
        }
        let manifest = Manifest {
            experiment: self.experiment,
            tag: self.tag,
            tool_version: TOOL_VERSION,
            determinism: DETERMINISM_NOTE,
            parameters,
            failed_cells: self.cells.iter().filter(|c| c.status == "failed").count(),
            files,
            cells: self.cells,
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        write_json(&self.dir.join("manifest.json"), &manifest)?;
        Ok(manifest)
    }
}

/// Runs independent jobs on at most `workers` threads. Results come back in
/// job order; errors and panics are recorded per job instead of aborting.
pub fn run_cells<T, F>(workers: usize, labels: Vec<String>, job: F) -> Result<Vec<(CellRecord, Option<T>)>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| {
        labels
            .into_par_iter()
            .enumerate()
            .map(|(i, label)| {
                let start = Instant::now();
                let outcome = catch_unwind(AssertUnwindSafe(|| job(i)));
                let wall_time_s = start.elapsed().as_secs_f64();
                let (value, error) = match outcome {
                    Ok(Ok(v)) => (Some(v), None),
                    Ok(Err(e)) => (None, Some(e.to_string())),
                    Err(_) => (None, Some("panic while evaluating cell".to_string())),
                };
                let record = CellRecord {
                    label,
                    status: if value.is_some() { "ok" } else { "failed" },
                    error,
                    wall_time_s,
                };
                (record, value)
            })
            .collect()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jobs_keep_order_and_contain_failures() {
        let out = run_cells(2, (0..5).map(|i| format!("job{i}")).collect(), |i| {
            if i == 3 {
                Err(Error::ZeroState)
            } else {
                Ok(i * 10)
            }
        })
        .unwrap();
        let values: Vec<Option<usize>> = out.iter().map(|(_, v)| *v).collect();
        assert_eq!(values, vec![Some(0), Some(10), Some(20), None, Some(40)]);
        assert_eq!(out[3].0.status, "failed");
        assert_eq!(out[4].0.label, "job4");
    }

    #[test]
    fn manifest_lists_files() {
        let dir = tempfile::tempdir().unwrap();
        let run_dir = dir.path().join("exp").join("tag1");
        let mut out = RunOutput::new(&run_dir, "exp").unwrap();
        let mut t = Table::new(["x", "y"]);
        t.push(vec![1.0.into(), 2.0.into()]);
        out.write_table("xy.csv", &t, Some(PlotKind::Lines { x: 1, y: vec![2] }))
            .unwrap();
        let m = out.finish(serde_json::json!({"a": 1}), true).unwrap();
        assert_eq!(m.files, vec!["data/xy.csv", "plot.gp"]);
        assert_eq!(m.tag, "tag1");
        assert!(run_dir.join("manifest.json").exists());
        assert!(run_dir.join("plot.gp").exists());
    }
}
