//! Physical configuration: lattice geometry, atomic species, probe optics.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Real;
use crate::units::{self, AtomData};

/// Default plane-wave cutoff `L` (basis indices `-L..=L`).
pub const DEFAULT_CUTOFF: usize = 12;
/// Default number of bands retained per dimension.
pub const DEFAULT_BANDS: usize = 6;

/// Lattice geometry. Depths are in recoil energies, the spacing in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec<T> {
    pub sites: [usize; 3],
    pub depths: [T; 3],
    pub spacing: T,
    pub n_bands: usize,
    pub cutoff: usize,
}

impl<T: Real> LatticeSpec<T> {
    pub fn new(sites: [usize; 3], depths: [T; 3], spacing: T) -> Result<Self> {
        let spec = LatticeSpec {
            sites,
            depths,
            spacing,
            n_bands: DEFAULT_BANDS,
            cutoff: DEFAULT_CUTOFF,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_bands(mut self, n_bands: usize, cutoff: usize) -> Result<Self> {
        self.n_bands = n_bands;
        self.cutoff = cutoff;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites.iter().any(|&m| m == 0) {
            return Err(invalid("site counts must be positive"));
        }
        if self.depths.iter().any(|d| !(*d >= T::zero()) || !d.is_finite()) {
            return Err(invalid("lattice depths must be finite and non-negative"));
        }
        if !(self.spacing > T::zero()) || !self.spacing.is_finite() {
            return Err(invalid("lattice spacing must be positive"));
        }
        if self.n_bands == 0 {
            return Err(invalid("at least one band is required"));
        }
        if 2 * self.cutoff + 1 <= self.n_bands {
            return Err(invalid(format!(
                "plane-wave basis of size {} cannot hold {} bands",
                2 * self.cutoff + 1,
                self.n_bands
            )));
        }
        Ok(())
    }

    /// Total number of sites `M = M_x M_y M_z`.
    pub fn site_count(&self) -> usize {
        self.sites.iter().product()
    }
}

/// Atomic species and probe laser.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesSpec<T> {
    /// kg
    pub mass: T,
    /// s-wave scattering length, m
    pub scattering_length: T,
    /// linewidth, rad/s
    pub gamma: T,
    /// transition wavelength, m
    pub wavelength: T,
    /// detuning in units of `gamma`
    pub detuning: T,
    /// probe intensity, W/m^2
    pub intensity: T,
    /// Probe wavelength; `None` ties the probe to the lattice (`|k_i| = pi/a`).
    #[serde(default)]
    pub probe_wavelength: Option<T>,
}

impl<T: Real> SpeciesSpec<T> {
    pub fn from_data(data: &AtomData, detuning: T, intensity: T) -> Result<Self> {
        let s = SpeciesSpec {
            mass: T::lit(data.mass),
            scattering_length: T::lit(data.scattering_length),
            gamma: T::lit(data.gamma),
            wavelength: T::lit(data.wavelength),
            detuning,
            intensity,
            probe_wavelength: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: T| x > T::zero() && x.is_finite();
        if !positive(self.mass) || !positive(self.gamma) || !positive(self.wavelength) {
            return Err(invalid("mass, linewidth and wavelength must be positive"));
        }
        if !positive(self.intensity) {
            return Err(invalid("probe intensity must be positive"));
        }
        if !(self.scattering_length >= T::zero()) {
            return Err(invalid("scattering length must be non-negative"));
        }
        if self.detuning == T::zero() || !self.detuning.is_finite() {
            return Err(invalid("detuning must be finite and nonzero"));
        }
        if let Some(l) = self.probe_wavelength {
            if !positive(l) {
                return Err(invalid("probe wavelength must be positive"));
            }
        }
        Ok(())
    }

    /// Lattice spacing used when none is given: half the transition wavelength.
    pub fn default_spacing(&self) -> T {
        self.wavelength / T::lit(2.0)
    }

    /// Absolute detuning in rad/s.
    pub fn detuning_rad(&self) -> T {
        self.detuning * self.gamma
    }
}

/// Recoil energy `hbar^2 pi^2 / (2 m a^2)` in joules.
pub fn recoil_energy<T: Real>(lattice: &LatticeSpec<T>, species: &SpeciesSpec<T>) -> T {
    let hbar = T::lit(units::HBAR);
    let a = lattice.spacing;
    hbar * hbar * T::PI() * T::PI() / (T::lit(2.0) * species.mass * a * a)
}

/// Probe wavenumber `|k_i|` in rad/m.
pub fn probe_wavenumber<T: Real>(lattice: &LatticeSpec<T>, species: &SpeciesSpec<T>) -> T {
    match species.probe_wavelength {
        Some(l) => T::lit(2.0) * T::PI() / l,
        None => T::PI() / lattice.spacing,
    }
}

/// `|k_i| a / pi`: the probe wavenumber in lattice units (1 when tied to the lattice).
pub fn probe_ratio<T: Real>(lattice: &LatticeSpec<T>, species: &SpeciesSpec<T>) -> T {
    probe_wavenumber(lattice, species) * lattice.spacing / T::PI()
}

/// Dipole scattering distribution `I_atom(theta)` in photons s^-1 sr^-1 per unit
/// structure factor, for a probe of wavenumber `k_i` (rad/m).
pub fn atom_prefactor<T: Real>(theta: T, species: &SpeciesSpec<T>, k_i: T) -> T {
    let hbar = T::lit(units::HBAR);
    let c = T::lit(units::SPEED_OF_LIGHT);
    let delta = species.detuning_rad();
    let cos = theta.cos();
    T::lit(9.0) * species.intensity * species.gamma * species.gamma * (T::one() + cos * cos)
        / (T::lit(32.0) * hbar * c * k_i * k_i * k_i * delta * delta)
}
