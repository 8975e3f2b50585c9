//! Dense symmetric eigendecomposition and per-state diagnostics.

use nalgebra::{DMatrix, DVector};

use super::clusters::{partition_clusters, ClusterLabel, ClusterPartition};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Number of boundary sites used for edge weights: `ceil(N / 10)`.
pub fn boundary_window(n: usize) -> usize {
    n.div_ceil(10).max(1)
}

/// Inverse participation ratio `sum |psi|^4 / (sum |psi|^2)^2`.
///
/// Independent of the state's normalization.
pub fn ipr<T: Real>(state: &[T]) -> Result<T> {
    ipr_of_density(state.iter().map(|&a| a * a))
}

/// IPR computed from site probabilities `p_m = |psi_m|^2`.
pub fn ipr_of_density<T: Real>(density: impl IntoIterator<Item = T>) -> Result<T> {
    let (mut s2, mut s4) = (T::zero(), T::zero());
    for p in density {
        s2 += p;
        s4 += p * p;
    }
    if s2 <= T::zero() {
        return Err(Error::ZeroState);
    }
    Ok(s4 / (s2 * s2))
}

/// Fraction of the probability carried by the leftmost and rightmost
/// `ceil(N/10)` sites.
pub fn boundary_weights<T: Real>(density: &[T]) -> (T, T) {
    let n = density.len();
    let w = boundary_window(n).min(n);
    let total: T = density.iter().fold(T::zero(), |a, &b| a + b);
    if total <= T::zero() {
        return (T::zero(), T::zero());
    }
    let left = density[..w].iter().fold(T::zero(), |a, &b| a + b);
    let right = density[n - w..].iter().fold(T::zero(), |a, &b| a + b);
    (left / total, right / total)
}

/// Eigendecomposition of one Hamiltonian plus static diagnostics.
#[derive(Clone, Debug)]
pub struct SpectrumResult<T: Real> {
    /// Ascending eigenvalues.
    pub energies: DVector<T>,
    /// Orthonormal eigenvectors stored as columns, matching `energies`.
    pub states: DMatrix<T>,
    pub ipr: Vec<T>,
    pub boundary_weight_left: Vec<T>,
    pub boundary_weight_right: Vec<T>,
    /// Three-cluster structure, when the spectrum has one.
    pub partition: Option<ClusterPartition>,
    pub cluster_labels: Option<Vec<ClusterLabel>>,
}

impl<T: Real> SpectrumResult<T> {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn state(&self, k: usize) -> Vec<T> {
        self.states.column(k).iter().copied().collect()
    }

    /// Largest of the two boundary weights of state `k`.
    pub fn max_boundary_weight(&self, k: usize) -> T {
        self.boundary_weight_left[k].max(self.boundary_weight_right[k])
    }

    /// States whose weight in either boundary window exceeds one half.
    pub fn is_edge_state(&self, k: usize) -> bool {
        self.max_boundary_weight(k) > T::lit(0.5)
    }

    /// Median spacing between consecutive energies.
    pub fn median_spacing(&self) -> T {
        let gaps: Vec<T> = self
            .energies
            .as_slice()
            .windows(2)
            .map(|w| w[1] - w[0])
            .collect();
        median(gaps)
    }
}

pub(crate) fn median<T: Real>(mut xs: Vec<T>) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        (xs[mid - 1] + xs[mid]) / T::lit(2.0)
    }
}

/// Full symmetric eigendecomposition with ascending energies and a
/// deterministic sign convention: the largest-magnitude component of every
/// eigenvector is positive (earliest site wins ties).
pub fn eigh<T: Real>(h: &DMatrix<T>) -> Result<(DVector<T>, DMatrix<T>)> {
    let n = h.nrows();
    if n != h.ncols() {
        return Err(Error::InvalidParameter(format!(
            "Hamiltonian must be square, got {}x{}",
            n,
            h.ncols()
        )));
    }
    if h.iter().any(|x| !x.is_finite_value()) {
        return Err(Error::InvalidParameter(
            "Hamiltonian has non-finite entries".into(),
        ));
    }
    // nalgebra's symmetric QR loses accuracy on nearly degenerate pairs, so
    // the decomposition is done by faer in f64.
    let a = faer::Mat::<f64>::from_fn(n, n, |i, j| h[(i, j)].as_f64());
    let eig = a
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| Error::EigenNoConvergence(n))?;
    let values: Vec<T> = (0..n).map(|k| T::lit(eig.S()[k])).collect();
    let vectors = DMatrix::<T>::from_fn(n, n, |i, k| T::lit(eig.U()[(i, k)]));

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite eigenvalues"));

    let energies = DVector::from_fn(n, |k, _| values[order[k]]);
    let mut states = DMatrix::zeros(n, n);
    let tie = T::lit(1e-9);
    for (k, &src) in order.iter().enumerate() {
        let col = vectors.column(src);
        let norm = col.norm();
        let mut pivot = 0;
        let mut best = T::zero();
        for (m, &x) in col.iter().enumerate() {
            if x.abs() > best * (T::one() + tie) {
                best = x.abs();
                pivot = m;
            }
        }
        let sign = if col[pivot] < T::zero() {
            -T::one()
        } else {
            T::one()
        };
        states.set_column(k, &(col * (sign / norm)));
    }
    if energies.iter().any(|x| !x.is_finite_value()) || states.iter().any(|x| !x.is_finite_value())
    {
        return Err(Error::EigenNoConvergence(n));
    }
    Ok((energies, states))
}

/// Diagonalizes `h` and computes IPR, boundary weights and cluster labels.
pub fn diagonalize<T: Real>(h: &DMatrix<T>) -> Result<SpectrumResult<T>> {
    let (energies, states) = eigh(h)?;
    let n = energies.len();
    let mut ipr_values = Vec::with_capacity(n);
    let mut left = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    for k in 0..n {
        let density: Vec<T> = states.column(k).iter().map(|&a| a * a).collect();
        ipr_values.push(ipr_of_density(density.iter().copied())?);
        let (l, r) = boundary_weights(&density);
        left.push(l);
        right.push(r);
    }
    let mut spectrum = SpectrumResult {
        energies,
        states,
        ipr: ipr_values,
        boundary_weight_left: left,
        boundary_weight_right: right,
        partition: None,
        cluster_labels: None,
    };
    if let Ok(partition) = partition_clusters(&spectrum) {
        spectrum.cluster_labels = Some(partition.labels(&spectrum));
        spectrum.partition = Some(partition);
    }
    Ok(spectrum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::model::{build_hamiltonian, ModelParams};
    use std::f64::consts::PI;

    #[test]
    fn two_site_pauli_x() {
        let h = DMatrix::<f64>::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let s = diagonalize(&h).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert!((s.energies[0] + 1.0).abs() < 1e-14);
        assert!((s.energies[1] - 1.0).abs() < 1e-14);
        assert!((s.states[(0, 0)] - r).abs() < 1e-14);
        assert!((s.states[(1, 0)] + r).abs() < 1e-14);
        assert!((s.states[(0, 1)] - r).abs() < 1e-14);
        assert!((s.states[(1, 1)] - r).abs() < 1e-14);
    }

    #[test]
    fn open_chain_dispersion() {
        let h = build_hamiltonian(&ModelParams::aa(0.0, 0.0, 10)).unwrap();
        let s = diagonalize(&h).unwrap();
        // closed form 2 cos(k pi / 11), sorted ascending
        let mut oracle: Vec<f64> = (1..=10).map(|k| 2.0 * (k as f64 * PI / 11.0).cos()).collect();
        oracle.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (e, o) in s.energies.iter().zip(&oracle) {
            assert!((e - o).abs() < 1e-12, "{e} vs {o}");
        }
    }

    #[test]
    fn ipr_reference_values() {
        let n = 7;
        assert!((ipr(&vec![1.0; n]).unwrap() - 1.0 / n as f64).abs() < 1e-15);
        let mut single = vec![0.0; n];
        single[3] = 1.0;
        assert_eq!(ipr(&single).unwrap(), 1.0);
        assert!((ipr(&[1.0f64, 1.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(ipr(&[0.0, 0.0]), Err(Error::ZeroState)));
    }

    #[test]
    fn sign_convention_is_deterministic() {
        let h = build_hamiltonian(&ModelParams::sample(1.3, 0.7, 21)).unwrap();
        let s = diagonalize(&h).unwrap();
        for k in 0..s.len() {
            let col = s.states.column(k);
            let (imax, _) = col
                .iter()
                .enumerate()
                .fold((0, 0.0f64), |acc, (i, x): (usize, &f64)| if x.abs() > acc.1 * (1.0 + 1e-9) { (i, x.abs()) } else { acc });
            assert!(col[imax] > 0.0);
        }
    }

    #[test]
    fn boundary_weight_window() {
        assert_eq!(boundary_window(33), 4);
        assert_eq!(boundary_window(38), 4);
        assert_eq!(boundary_window(144), 15);
        let mut d = vec![0.0; 20];
        d[0] = 0.5;
        d[19] = 0.25;
        d[10] = 0.25;
        let (l, r) = boundary_weights(&d);
        assert_eq!((l, r), (0.5, 0.25));
    }

    #[test]
    fn rejects_non_finite() {
        let h = DMatrix::<f64>::from_row_slice(2, 2, &[0.0, f64::NAN, f64::NAN, 0.0]);
        assert!(diagonalize(&h).is_err());
    }
}
