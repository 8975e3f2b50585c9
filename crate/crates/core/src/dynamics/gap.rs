//! Minimum gap between a channel's bulk subchannel and the level above it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{diagonalize, Lattice};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinGap {
    pub delta: f64,
    pub delta_sq: f64,
    pub phi_at_min: f64,
    pub level_index: usize,
    /// Grid points at which the level behaved as a bulk state.
    pub bulk_points: usize,
}

/// Gap `E_{k+1} - E_k` at `phi`, if level `k` is a bulk state there.
fn bulk_gap(lattice: &Lattice<f64>, level: usize, phi: f64) -> Result<Option<f64>> {
    let spectrum = diagonalize(&lattice.hamiltonian_at(phi))?;
    if spectrum.is_edge_state(level) {
        return Ok(None);
    }
    Ok(Some(spectrum.energies[level + 1] - spectrum.energies[level]))
}

/// Minimum over `phi_grid` of the gap above `level`, restricted to phases
/// where the level is bulk (boundary weights below one half). Every local
/// minimum on the grid is refined by golden-section search between its
/// neighbours so narrow avoided crossings are resolved.
pub fn min_gap(lattice: &Lattice<f64>, level: usize, phi_grid: &[f64]) -> Result<MinGap> {
    if level + 1 >= lattice.n() {
        return Err(Error::InvalidParameter(format!(
            "level {level} has no level above it (N = {})",
            lattice.n()
        )));
    }
    let gaps: Vec<Option<f64>> = phi_grid
        .iter()
        .map(|&phi| bulk_gap(lattice, level, phi))
        .collect::<Result<_>>()?;
    let bulk_points = gaps.iter().filter(|g| g.is_some()).count();
    if bulk_points == 0 {
        return Err(Error::EmptyBulkInterval);
    }
    let mut best = (f64::INFINITY, f64::NAN);
    for (i, g) in gaps.iter().enumerate() {
        let Some(g) = *g else { continue };
        if g < best.0 {
            best = (g, phi_grid[i]);
        }
        let left = i.checked_sub(1).and_then(|j| gaps[j]);
        let right = gaps.get(i + 1).copied().flatten();
        let is_local_min = left.is_none_or(|l| g <= l) && right.is_none_or(|r| g <= r);
        if is_local_min && i > 0 && i + 1 < phi_grid.len() {
            if let Some((rg, rphi)) = refine(lattice, level, phi_grid[i - 1], phi_grid[i + 1])? {
                if rg < best.0 {
                    best = (rg, rphi);
                }
            }
        }
    }
    Ok(MinGap {
        delta: best.0,
        delta_sq: best.0 * best.0,
        phi_at_min: best.1,
        level_index: level,
        bulk_points,
    })
}

fn refine(lattice: &Lattice<f64>, level: usize, a: f64, b: f64) -> Result<Option<(f64, f64)>> {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a.min(b), a.max(b));
    let eval = |phi: f64| -> Result<f64> {
        Ok(bulk_gap(lattice, level, phi)?.unwrap_or(f64::INFINITY))
    };
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (eval(c)?, eval(d)?);
    for _ in 0..60 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = eval(d)?;
        }
    }
    let (g, phi) = if fc < fd { (fc, c) } else { (fd, d) };
    Ok(g.is_finite().then_some((g, phi)))
}
