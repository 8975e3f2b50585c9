//! Resumable parallel sweeps over rectangular parameter grids.
//!
//! Completed cells are appended to a JSON-lines checkpoint by a single
//! writer thread. A resumed sweep skips every cell already recorded there,
//! and because cells are pure and floats round-trip exactly through the
//! checkpoint, resumed and uninterrupted runs produce identical tables.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::table::{Cell, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisScale {
    Linear,
    Log,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub scale: AxisScale,
}

impl Axis {
    pub fn linear(name: &str, min: f64, max: f64, count: usize) -> Self {
        Axis {
            name: name.into(),
            min,
            max,
            count,
            scale: AxisScale::Linear,
        }
    }

    pub fn log(name: &str, min: f64, max: f64, count: usize) -> Self {
        Axis {
            scale: AxisScale::Log,
            ..Axis::linear(name, min, max, count)
        }
    }

    /// Coordinate of point `i`; both endpoints are reproduced exactly.
    pub fn value(&self, i: usize) -> f64 {
        if i == 0 || self.count == 1 {
            return self.min;
        }
        if i + 1 == self.count {
            return self.max;
        }
        let s = i as f64 / (self.count - 1) as f64;
        match self.scale {
            AxisScale::Linear => self.min + s * (self.max - self.min),
            AxisScale::Log => (self.min.ln() + s * (self.max.ln() - self.min.ln())).exp(),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("axis `{}`: {m}", self.name)));
        if self.count == 0 {
            return bad("needs at least one point");
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.max < self.min {
            return bad("bounds must be finite with min <= max");
        }
        if self.scale == AxisScale::Log && self.min <= 0.0 {
            return bad("logarithmic axis needs positive bounds");
        }
        Ok(())
    }
}

/// Grid definition plus per-cell results. Cells are numbered row-major with
/// the last axis varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepGrid {
    pub axes: Vec<Axis>,
    /// NaN for cells that are pending or failed.
    pub results: Vec<f64>,
    pub completed: Vec<bool>,
    pub failures: BTreeMap<usize, String>,
    /// Seconds spent per cell; NaN when unknown.
    pub wall_times: Vec<f64>,
}

impl SweepGrid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidParameter("sweep needs at least one axis".into()));
        }
        for a in &axes {
            a.validate()?;
        }
        let len = axes.iter().map(|a| a.count).product();
        Ok(SweepGrid {
            axes,
            results: vec![f64::NAN; len],
            completed: vec![false; len],
            failures: BTreeMap::new(),
            wall_times: vec![f64::NAN; len],
        })
    }

    pub fn len(&self) -> usize {
        self.results.len()
    }

    pub fn is_empty(&self) -> bool {
        self.results.is_empty()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.count).collect()
    }

    /// Per-axis indices of `cell`.
    pub fn indices(&self, cell: usize) -> Vec<usize> {
        let mut rest = cell;
        let mut idx = vec![0; self.axes.len()];
        for (slot, axis) in idx.iter_mut().zip(&self.axes).rev() {
            *slot = rest % axis.count;
            rest /= axis.count;
        }
        idx
    }

    pub fn coords(&self, cell: usize) -> Vec<f64> {
        self.indices(cell)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.value(i))
            .collect()
    }

    pub fn cell_index(&self, indices: &[usize]) -> usize {
        indices
            .iter()
            .zip(&self.axes)
            .fold(0, |acc, (&i, a)| acc * a.count + i)
    }

    pub fn pending(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&c| !self.completed[c])
    }

    pub fn completed_count(&self) -> usize {
        self.completed.iter().filter(|&&c| c).count()
    }

    pub fn is_complete(&self) -> bool {
        self.completed.iter().all(|&c| c)
    }

    /// Stable description of the axes, used to tie checkpoints to a grid.
    pub fn fingerprint(&self) -> String {
        serde_json::to_string(&self.axes).expect("axes serialize")
    }

    /// One row per cell in cell order: `cell, <axes...>, <value_name>, status`.
    pub fn to_table(&self, value_name: &str) -> Table {
        let mut columns = vec!["cell".to_string()];
        columns.extend(self.axes.iter().map(|a| a.name.clone()));
        columns.push(value_name.into());
        columns.push("status".into());
        let mut t = Table::new(columns);
        for cell in 0..self.len() {
            let mut row: Vec<Cell> = vec![cell.into()];
            row.extend(self.coords(cell).into_iter().map(Cell::Float));
            row.push(Cell::Float(self.results[cell]));
            let status = if self.failures.contains_key(&cell) {
                "failed"
            } else if self.completed[cell] {
                "ok"
            } else {
                "pending"
            };
            row.push(status.into());
            t.push(row);
        }
        t
    }

    fn record(&mut self, rec: &CheckpointRecord) {
        self.completed[rec.cell] = true;
        self.wall_times[rec.cell] = rec.wall_time_s;
        match (&rec.value, &rec.error) {
            (Some(v), None) => {
                self.results[rec.cell] = *v;
                self.failures.remove(&rec.cell);
            }
            (_, err) => {
                self.results[rec.cell] = f64::NAN;
                self.failures.insert(
                    rec.cell,
                    err.clone().unwrap_or_else(|| "missing value".into()),
                );
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    /// Upper bound on concurrently evaluated cells.
    pub workers: usize,
    /// JSON-lines checkpoint; `None` keeps results in memory only.
    pub checkpoint: Option<PathBuf>,
    /// Caller-supplied label describing the cell task. Combined with the
    /// grid fingerprint it keys checkpoint records, so several sweeps can
    /// share one file.
    pub label: String,
    /// Evaluate at most this many new cells, then return.
    pub cell_budget: Option<usize>,
}

impl SweepOptions {
    pub fn in_memory(workers: usize) -> Self {
        SweepOptions {
            workers,
            checkpoint: None,
            label: String::new(),
            cell_budget: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct CheckpointRecord {
    sweep: String,
    cell: usize,
    coords: Vec<f64>,
    value: Option<f64>,
    error: Option<String>,
    wall_time_s: f64,
}

/// Evaluates every pending cell of `grid` with `task`, at most
/// `options.workers` at a time.
///
/// Errors and panics inside `task` become failed cells. Only checkpoint I/O
/// errors abort the sweep.
pub fn run_sweep<F>(mut grid: SweepGrid, task: F, options: &SweepOptions) -> Result<SweepGrid>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let sweep_id = format!("{}|{}", options.label, grid.fingerprint());
    if let Some(path) = &options.checkpoint {
        for rec in load_checkpoint(path)? {
            if rec.sweep == sweep_id && rec.cell < grid.len() {
                grid.record(&rec);
            }
        }
    }
    let budget = options.cell_budget.unwrap_or(usize::MAX);
    let pending: Vec<usize> = grid.pending().take(budget).collect();
    if pending.is_empty() {
        return Ok(grid);
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    let mut sink = match &options.checkpoint {
        Some(path) => {
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            let file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| Error::io(path, e))?;
            Some((path.clone(), file))
        }
        None => None,
    };

    let (tx, rx) = mpsc::channel::<CheckpointRecord>();
    let grid_ref = &grid;
    let task = &task;
    let records = std::thread::scope(|scope| {
        let writer = scope.spawn(move || -> Result<Vec<CheckpointRecord>> {
            let mut out = Vec::new();
            let mut first_error = None;
            for rec in rx {
                if let (Some((path, file)), None) = (sink.as_mut(), &first_error) {
                    let mut line = serde_json::to_string(&rec).expect("record serializes");
                    line.push('\n');
                    if let Err(e) = file
                        .write_all(line.as_bytes())
                        .and_then(|_| file.sync_data())
                    {
                        first_error = Some(Error::io(path.as_path(), e));
                    }
                }
                out.push(rec);
            }
            first_error.map_or(Ok(out), Err)
        });
        pool.install(|| {
            pending.par_iter().for_each_with(tx, |tx, &cell| {
                let coords = grid_ref.coords(cell);
                let start = Instant::now();
                let outcome = catch_unwind(AssertUnwindSafe(|| task(&coords)));
                let (value, error) = match outcome {
                    Ok(Ok(v)) if v.is_finite() => (Some(v), None),
                    Ok(Ok(v)) => (None, Some(format!("non-finite result {v}"))),
                    Ok(Err(e)) => (None, Some(e.to_string())),
                    Err(panic) => (None, Some(format!("panic: {}", panic_message(&panic)))),
                };
                let rec = CheckpointRecord {
                    sweep: sweep_id.clone(),
                    cell,
                    coords,
                    value,
                    error,
                    wall_time_s: start.elapsed().as_secs_f64(),
                };
                // The receiver only disappears if the writer thread died.
                let _ = tx.send(rec);
            });
        });
        writer.join().expect("checkpoint writer panicked")
    })?;
    for rec in &records {
        grid.record(rec);
    }
    Ok(grid)
}

fn panic_message(panic: &Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = panic.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = panic.downcast_ref::<String>() {
        s.clone()
    } else {
        "unknown payload".into()
    }
}

/// Reads all well-formed records. A torn final line left by a crash is
/// dropped and the file is rewritten without it, so appends stay aligned.
fn load_checkpoint(path: &Path) -> Result<Vec<CheckpointRecord>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::io(path, e)),
    };
    let mut records = Vec::new();
    let mut torn = false;
    let lines: Vec<&str> = text.lines().collect();
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<CheckpointRecord>(line) {
            Ok(rec) => records.push(rec),
            Err(_) if i + 1 == lines.len() => torn = true,
            Err(e) => {
                return Err(Error::Format {
                    path: path.to_path_buf(),
                    message: format!("line {}: {e}", i + 1),
                })
            }
        }
    }
    if torn || !(text.is_empty() || text.ends_with('\n')) {
        let mut clean = String::new();
        for rec in &records {
            clean.push_str(&serde_json::to_string(rec).expect("record serializes"));
            clean.push('\n');
        }
        let tmp = path.with_extension("jsonl.tmp");
        fs::write(&tmp, clean).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> SweepGrid {
        SweepGrid::new(vec![
            Axis::linear("x", 0.0, 1.0, 3),
            Axis::log("y", 1e-3, 1e-1, 3),
        ])
        .unwrap()
    }

    #[test]
    fn axes_hit_endpoints() {
        let a = Axis::log("omega", 1e-6, 1e-3, 6);
        let v = a.values();
        assert_eq!(v[0], 1e-6);
        assert_eq!(v[5], 1e-3);
        assert!((v[1] - 1e-6 * 10f64.powf(0.6)).abs() < 1e-18);
        assert!(Axis::log("bad", 0.0, 1.0, 2).validate().is_err());
    }

    #[test]
    fn row_major_indexing() {
        let g = grid();
        assert_eq!(g.len(), 9);
        assert_eq!(g.indices(5), vec![1, 2]);
        assert_eq!(g.cell_index(&[1, 2]), 5);
        assert_eq!(g.coords(5), vec![0.5, 1e-1]);
    }

    #[test]
    fn failures_and_panics_are_contained() {
        let g = run_sweep(
            grid(),
            |c| {
                if c[0] == 0.5 && c[1] == 1e-3 {
                    panic!("boom");
                }
                if c[0] == 1.0 && c[1] == 1e-3 {
                    return Err(Error::ZeroState);
                }
                Ok(c[0] + c[1])
            },
            &SweepOptions::in_memory(2),
        )
        .unwrap();
        assert!(g.is_complete());
        assert_eq!(g.failures.len(), 2);
        assert!(g.failures[&3].contains("boom"));
        assert!(g.results[3].is_nan());
        assert_eq!(g.results[1], 0.0 + g.axes[1].value(1));
    }

    #[test]
    fn budget_then_resume_matches_full_run() {
        let dir = tempfile::tempdir().unwrap();
        let ck = dir.path().join("checkpoint.jsonl");
        let f = |c: &[f64]| Ok((c[0] * 3.0).sin() / c[1]);
        let mut opts = SweepOptions {
            workers: 2,
            checkpoint: Some(ck.clone()),
            label: "t".into(),
            cell_budget: Some(4),
        };
        let partial = run_sweep(grid(), f, &opts).unwrap();
        assert_eq!(partial.completed_count(), 4);
        opts.cell_budget = None;
        let calls = std::sync::atomic::AtomicUsize::new(0);
        let resumed = run_sweep(
            grid(),
            |c| {
                calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                f(c)
            },
            &opts,
        )
        .unwrap();
        assert_eq!(calls.into_inner(), 5);
        let full = run_sweep(grid(), f, &SweepOptions::in_memory(1)).unwrap();
        assert_eq!(
            resumed.to_table("v").to_csv_string(),
            full.to_table("v").to_csv_string()
        );
    }

    #[test]
    fn torn_checkpoint_line_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let ck = dir.path().join("checkpoint.jsonl");
        let opts = SweepOptions {
            workers: 1,
            checkpoint: Some(ck.clone()),
            label: "t".into(),
            cell_budget: Some(2),
        };
        run_sweep(grid(), |c| Ok(c[0]), &opts).unwrap();
        let mut text = fs::read_to_string(&ck).unwrap();
        text.push_str("{\"sweep\":\"t");
        fs::write(&ck, text).unwrap();
        let g = run_sweep(grid(), |c| Ok(c[0]), &SweepOptions { cell_budget: None, ..opts }).unwrap();
        assert!(g.is_complete());
        let lines = fs::read_to_string(&ck).unwrap().lines().count();
        assert_eq!(lines, 9);
    }
}
