use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{diagonalize, partition_clusters, Channel, Lattice, ModelParams};
use crate::scalar::Real;

/// Linear phase schedule `phi(s) = phi_start + rate * s` for `s in [0, duration]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRamp<T> {
    pub phi_start: T,
    /// Signed ramp rate; zero gives a static Hamiltonian.
    pub rate: T,
    pub duration: T,
}

impl<T: Real> PhaseRamp<T> {
    pub fn fixed(phi: T, duration: T) -> Self {
        PhaseRamp {
            phi_start: phi,
            rate: T::zero(),
            duration,
        }
    }

    pub fn phase_at(&self, s: T) -> T {
        self.phi_start + self.rate * s
    }

    pub fn phi_end(&self) -> T {
        self.phase_at(self.duration)
    }

    /// The same path traversed backwards.
    pub fn reversed(&self) -> Self {
        PhaseRamp {
            phi_start: self.phi_end(),
            rate: -self.rate,
            duration: self.duration,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.phi_start, self.rate, self.duration]
            .iter()
            .all(|x| x.is_finite_value());
        if !finite || self.duration < T::zero() {
            return Err(Error::InvalidParameter(format!(
                "phase ramp needs finite values and non-negative duration, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// An edge-bulk-edge pumping path swept at constant frequency `omega`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec<T> {
    /// Sorted index of the bulk subchannel, once resolved.
    pub level_index: Option<usize>,
    pub phi_start: T,
    pub phi_end: T,
    pub omega: T,
}

impl<T: Real> ChannelSpec<T> {
    pub fn new(phi_start: T, phi_end: T, omega: T) -> Result<Self> {
        let spec = ChannelSpec {
            level_index: None,
            phi_start,
            phi_end,
            omega,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Default window of a pumping channel: A sweeps 0.39pi -> 1.59pi,
    /// B sweeps 1.39pi -> 0.59pi.
    pub fn pump(channel: Channel, omega: T) -> Result<Self> {
        let pi = T::pi();
        let (a, b) = match channel {
            Channel::A => (T::lit(0.39), T::lit(1.59)),
            Channel::B => (T::lit(1.39), T::lit(0.59)),
        };
        Self::new(a * pi, b * pi, omega)
    }

    /// Shared forward window 0.39pi -> 1.39pi used for excitation transfer.
    pub fn transfer_window(omega: T) -> Result<Self> {
        let pi = T::pi();
        Self::new(T::lit(0.39) * pi, T::lit(1.39) * pi, omega)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite_value() && self.omega > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        if !(self.phi_start.is_finite_value() && self.phi_end.is_finite_value())
            || self.phi_start == self.phi_end
        {
            return Err(Error::InvalidParameter(
                "channel phases must be finite and distinct".into(),
            ));
        }
        Ok(())
    }

    pub fn direction(&self) -> T {
        if self.phi_end > self.phi_start {
            T::one()
        } else {
            -T::one()
        }
    }

    /// Total sweep time `|phi_end - phi_start| / omega`.
    pub fn duration(&self) -> T {
        (self.phi_end - self.phi_start).abs() / self.omega
    }

    pub fn ramp(&self) -> PhaseRamp<T> {
        PhaseRamp {
            phi_start: self.phi_start,
            rate: self.direction() * self.omega,
            duration: self.duration(),
        }
    }

    pub fn midpoint(&self) -> T {
        (self.phi_start + self.phi_end) / T::lit(2.0)
    }

    /// Fills `level_index` with the channel's bulk subchannel at the window
    /// midpoint.
    pub fn resolve_level(&mut self, params: &ModelParams<T>, channel: Channel) -> Result<usize> {
        let lattice = Lattice::new(params.clone())?;
        let spectrum = diagonalize(&lattice.hamiltonian_at(self.midpoint()))?;
        let k = partition_clusters(&spectrum)?.bulk_subchannel(channel);
        self.level_index = Some(k);
        Ok(k)
    }
}
