//! Lattice parameters and Hamiltonian assembly.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Which Hamiltonian family to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// All-range hopping `t e^{-u|m-l|}`.
    ExpHopping,
    /// Nearest-neighbour Aubry-André reduction.
    Aa,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::ExpHopping => "exp-hopping",
            ModelKind::Aa => "aa",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp-hopping" | "exp" | "sample" => Ok(ModelKind::ExpHopping),
            "aa" => Ok(ModelKind::Aa),
            other => Err(Error::InvalidParameter(format!(
                "model must be `exp-hopping` or `aa`, got `{other}`"
            ))),
        }
    }
}

/// Hopping-range policy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HoppingRange<T> {
    Full,
    /// Drop every hopping term whose magnitude is below the given threshold.
    Truncate(T),
}

/// Default truncation threshold when a cutoff is requested.
pub const DEFAULT_HOPPING_EPSILON: f64 = 1e-12;

/// Physical specification of one lattice instance.
///
/// Energies are measured in units of the nearest-neighbour amplitude
/// `t1 = t e^{-u}`, which fixes `t = e^u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    pub u: T,
    pub v: T,
    pub zeta: T,
    pub phi: T,
    pub n: usize,
    pub hopping: HoppingRange<T>,
    pub kind: ModelKind,
}

impl<T: Real> ModelParams<T> {
    /// Inverse golden ratio `(sqrt 5 - 1) / 2`.
    pub fn golden_zeta() -> T {
        (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0)
    }

    /// Exponential-hopping model with `u = 1`, full-range hopping, golden `zeta`.
    pub fn sample(v: T, phi: T, n: usize) -> Self {
        ModelParams {
            u: T::one(),
            v,
            zeta: Self::golden_zeta(),
            phi,
            n,
            hopping: HoppingRange::Full,
            kind: ModelKind::ExpHopping,
        }
    }

    pub fn aa(v: T, phi: T, n: usize) -> Self {
        ModelParams {
            kind: ModelKind::Aa,
            ..Self::sample(v, phi, n)
        }
    }

    pub fn with_phi(&self, phi: T) -> Self {
        ModelParams {
            phi,
            ..self.clone()
        }
    }

    pub fn with_v(&self, v: T) -> Self {
        ModelParams { v, ..self.clone() }
    }

    /// Bare hopping amplitude, `t = e^u`.
    pub fn t(&self) -> T {
        self.u.exp()
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.u, self.v, self.zeta, self.phi]
            .iter()
            .all(|x| x.is_finite_value());
        if !finite {
            return Err(Error::InvalidParameter(
                "model parameters must be finite".into(),
            ));
        }
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!(
                "N must be at least 2, got {}",
                self.n
            )));
        }
        if self.u <= T::zero() {
            return Err(Error::InvalidParameter(format!(
                "u must be positive, got {}",
                self.u
            )));
        }
        if self.v < T::zero() {
            return Err(Error::InvalidParameter(format!(
                "V must be non-negative, got {}",
                self.v
            )));
        }
        if self.phi < T::zero() || self.phi > T::two_pi() {
            return Err(Error::InvalidParameter(format!(
                "phi must lie in [0, 2pi], got {}",
                self.phi
            )));
        }
        if let HoppingRange::Truncate(eps) = self.hopping {
            if !(eps.is_finite_value() && eps > T::zero()) {
                return Err(Error::InvalidParameter(format!(
                    "hopping cutoff must be a small positive number, got {eps}"
                )));
            }
        }
        Ok(())
    }
}

/// A validated lattice with the phase-independent pieces of `H` precomputed,
/// so `H(phi)` can be rebuilt cheaply while a phase is ramped.
#[derive(Clone, Debug)]
pub struct Lattice<T: Real> {
    params: ModelParams<T>,
    hopping: DMatrix<T>,
    // 2 pi zeta m for m = 1..N
    site_angles: DVector<T>,
}

impl<T: Real> Lattice<T> {
    pub fn new(params: ModelParams<T>) -> Result<Self> {
        params.validate()?;
        let n = params.n;
        let u = params.u;
        let mut hopping = DMatrix::zeros(n, n);
        for r in 1..n {
            let amp = match params.kind {
                ModelKind::Aa if r > 1 => break,
                ModelKind::Aa => T::one(),
                // t e^{-u r} with t = e^u
                ModelKind::ExpHopping => (u * (T::one() - T::from_count(r))).exp(),
            };
            if let HoppingRange::Truncate(eps) = params.hopping {
                if amp < eps {
                    break;
                }
            }
            for m in 0..n - r {
                hopping[(m, m + r)] = amp;
                hopping[(m + r, m)] = amp;
            }
        }
        let two_pi_zeta = T::two_pi() * params.zeta;
        let site_angles = DVector::from_fn(n, |m, _| two_pi_zeta * T::from_count(m + 1));
        Ok(Lattice {
            params,
            hopping,
            site_angles,
        })
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    /// On-site potential `w_m = V cos(2 pi zeta m + phi)` for `m = 1..N`.
    pub fn onsite(&self, phi: T) -> DVector<T> {
        let v = self.params.v;
        self.site_angles.map(|a| v * (a + phi).cos())
    }

    /// Hamiltonian at an arbitrary phase (used while the phase is ramped).
    pub fn hamiltonian_at(&self, phi: T) -> DMatrix<T> {
        let mut h = self.hopping.clone();
        h.set_diagonal(&self.onsite(phi));
        h
    }

    /// Hamiltonian at the phase stored in the parameters.
    pub fn hamiltonian(&self) -> DMatrix<T> {
        self.hamiltonian_at(self.params.phi)
    }
}

/// Builds the open-chain Hamiltonian for `params`.
pub fn build_hamiltonian<T: Real>(params: &ModelParams<T>) -> Result<DMatrix<T>> {
    Ok(Lattice::new(params.clone())?.hamiltonian())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    #[test]
    fn exp_hopping_entries_v_zero() {
        let p = ModelParams::sample(0.0, 0.0, 3);
        let h = build_hamiltonian(&p).unwrap();
        assert_eq!(h[(0, 1)], 1.0);
        assert_eq!(h[(1, 2)], 1.0);
        assert!((h[(0, 2)] - 1.0 / E).abs() < 1e-15);
        assert!((h[(0, 2)] - 0.36788).abs() < 1e-5);
        for m in 0..3 {
            assert_eq!(h[(m, m)], 0.0);
        }
    }

    #[test]
    fn onsite_first_site() {
        let p = ModelParams::sample(2.0, 0.0, 2);
        let h = build_hamiltonian(&p).unwrap();
        let zeta = (5f64.sqrt() - 1.0) / 2.0;
        let expected = 2.0 * (2.0 * PI * zeta).cos();
        assert!((h[(0, 0)] - expected).abs() < 1e-14);
        assert!((2.0 * PI * zeta - 3.8833).abs() < 1e-4);
    }

    #[test]
    fn aa_is_tridiagonal() {
        let p = ModelParams::aa(0.0, 0.0, 4);
        let h = build_hamiltonian(&p).unwrap();
        for i in 0usize..4 {
            for j in 0usize..4 {
                let expected = if i.abs_diff(j) == 1 { 1.0 } else { 0.0 };
                assert_eq!(h[(i, j)], expected);
            }
        }
    }

    #[test]
    fn exactly_symmetric() {
        let p = ModelParams::sample(2.3, 1.1, 17);
        let h = build_hamiltonian(&p).unwrap();
        assert_eq!(h, h.transpose());
    }

    #[test]
    fn truncation_drops_small_terms() {
        let mut p = ModelParams::sample(0.0, 0.0, 10);
        p.hopping = HoppingRange::Truncate(1e-2);
        let h = build_hamiltonian(&p).unwrap();
        // e^{1-r} >= 1e-2 keeps r <= 5
        assert!(h[(0, 5)] > 0.0);
        assert_eq!(h[(0, 6)], 0.0);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(build_hamiltonian(&ModelParams::sample(1.0, 0.0, 1)).is_err());
        assert!(build_hamiltonian(&ModelParams::sample(f64::NAN, 0.0, 5)).is_err());
        assert!(build_hamiltonian(&ModelParams::sample(-1.0, 0.0, 5)).is_err());
        let mut p = ModelParams::sample(1.0, 0.0, 5);
        p.u = 0.0;
        assert!(build_hamiltonian(&p).is_err());
        assert!(build_hamiltonian(&ModelParams::sample(1.0, 7.0, 5)).is_err());
    }

    #[test]
    fn single_precision_builds() {
        let p = ModelParams::<f32>::sample(1.0, 0.5, 8);
        let h = build_hamiltonian(&p).unwrap();
        assert_eq!(h[(0, 1)], 1.0f32);
    }
}
