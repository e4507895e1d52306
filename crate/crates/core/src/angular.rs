//! Angular photon-rate maps and their integrals over detectors and the sphere.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::geometry::ScatterGeometry;
use crate::phase::{Component, PhaseState, Selection, StructureFactorBreakdown};
use crate::quadrature::{adaptive, periodic_trapezoid, AdaptiveOptions, PeriodicOptions};
use crate::scalar::{Real, Vec3};
use crate::system::{atom_prefactor, probe_ratio, probe_wavenumber, LatticeSpec, SpeciesSpec};

/// Collection optics: central stop and acceptance half-angle, full azimuth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectorSpec<T> {
    pub theta_stop: T,
    pub theta_max: T,
}

impl<T: Real> DetectorSpec<T> {
    pub fn new(theta_stop: T, theta_max: T) -> Result<Self> {
        let half_pi = T::FRAC_PI_2();
        if !(theta_stop >= T::zero() && theta_stop <= theta_max && theta_max <= half_pi) {
            return Err(invalid(format!("detector needs 0 <= theta_stop <= theta_max <= pi/2, got {theta_stop}, {theta_max}")));
        }
        Ok(DetectorSpec { theta_stop, theta_max })
    }

    /// Acceptance from a numerical aperture `sin(theta_max)`.
    pub fn from_aperture(theta_stop: T, numerical_aperture: T) -> Result<Self> {
        if !(numerical_aperture > T::zero() && numerical_aperture <= T::one()) {
            return Err(invalid("numerical aperture must lie in (0, 1]"));
        }
        Self::new(theta_stop, numerical_aperture.asin())
    }
}

/// Probe optics shared by every direction.
#[derive(Debug, Clone)]
pub struct Optics<T> {
    pub species: SpeciesSpec<T>,
    /// `|k_i|` in rad/m.
    pub k_i: T,
    /// `|k_i| a / pi`.
    pub ratio: T,
    /// Azimuthal four-fold symmetry (square lattice with equal depths).
    pub square: bool,
}

impl<T: Real> Optics<T> {
    pub fn new(lattice: &LatticeSpec<T>, species: &SpeciesSpec<T>) -> Self {
        Optics {
            species: species.clone(),
            k_i: probe_wavenumber(lattice, species),
            ratio: probe_ratio(lattice, species),
            square: lattice.sites[0] == lattice.sites[1] && lattice.depths[0] == lattice.depths[1],
        }
    }

    /// `I_atom(theta)` in photons s^-1 sr^-1 per unit structure factor.
    pub fn prefactor(&self, theta: T) -> T {
        atom_prefactor(theta, &self.species, self.k_i)
    }

    pub fn transfer(&self, theta: T, phi: T) -> Vec3<T> {
        ScatterGeometry::raw(theta, phi).transfer_lattice_units(self.ratio)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AngularNode<T> {
    pub theta: T,
    pub phi: T,
    pub k: Vec3<T>,
    /// `I_atom(theta)`.
    pub prefactor: T,
    pub s: StructureFactorBreakdown<T>,
}

impl<T: Real> AngularNode<T> {
    /// Photon-rate density `I_atom(theta) S(k)` in photons s^-1 sr^-1.
    pub fn rate(&self) -> T {
        self.prefactor * self.s.total()
    }
}

/// Structure factor and photon rate on a tensor grid of directions.
#[derive(Debug, Clone, Serialize)]
pub struct AngularMap<T> {
    pub thetas: Vec<T>,
    pub phis: Vec<T>,
    /// Row-major in `(theta, phi)`.
    pub nodes: Vec<AngularNode<T>>,
}

pub fn angular_map<T: Real>(phase: &PhaseState<T>, optics: &Optics<T>, thetas: &[T], phis: &[T]) -> Result<AngularMap<T>> {
    for &t in thetas {
        if !(t >= T::zero() && t <= T::PI()) {
            return Err(invalid(format!("theta = {t} outside [0, pi]")));
        }
    }
    let pairs: Vec<(T, T)> = thetas.iter().flat_map(|t| phis.iter().map(move |p| (*t, *p))).collect();
    let nodes = pairs
        .par_iter()
        .map(|&(theta, phi)| {
            let k = optics.transfer(theta, phi);
            Ok(AngularNode { theta, phi, k, prefactor: optics.prefactor(theta), s: phase.evaluate(k, Selection::ALL)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AngularMap { thetas: thetas.to_vec(), phis: phis.to_vec(), nodes })
}

/// Evenly spaced grid including both ends.
pub fn linspace<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * T::of(i) / T::of(n - 1)).collect(),
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuadratureSpec<T> {
    pub rel_tol: T,
    pub theta_order: usize,
    pub theta_panels: usize,
    pub max_theta_panels: usize,
    pub min_phi_points: usize,
    pub max_phi_points: usize,
}

impl<T: Real> Default for QuadratureSpec<T> {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: T::lit(1e-4),
            theta_order: 8,
            theta_panels: 4,
            max_theta_panels: 256,
            min_phi_points: 16,
            max_phi_points: 4096,
        }
    }
}

impl<T: Real> QuadratureSpec<T> {
    fn theta(&self) -> AdaptiveOptions<T> {
        AdaptiveOptions { rel_tol: self.rel_tol, order: self.theta_order, initial_panels: self.theta_panels, max_panels: self.max_theta_panels }
    }

    fn phi(&self) -> PeriodicOptions<T> {
        PeriodicOptions { rel_tol: self.rel_tol / T::lit(10.0), min_points: self.min_phi_points, max_points: self.max_phi_points }
    }
}

/// Photon rates (photons/s) integrated over a solid-angle region, per component.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateIntegral<T> {
    pub rates: StructureFactorBreakdown<T>,
    /// Outer (polar) quadrature error estimate per component.
    pub error: StructureFactorBreakdown<T>,
    /// Structure-factor evaluations (directions) used.
    pub evaluations: usize,
}

impl<T: Real> RateIntegral<T> {
    pub fn total(&self) -> T {
        self.rates.total()
    }

    pub fn sum(&self, components: &[Component]) -> T {
        components.iter().map(|c| self.rates.get(*c)).sum()
    }
}

fn to_array<T: Real>(b: &StructureFactorBreakdown<T>) -> [T; 4] {
    [b.s_g0, b.s_g1, b.s_g2, b.s_b]
}

fn from_array<T: Real>(a: [T; 4]) -> StructureFactorBreakdown<T> {
    StructureFactorBreakdown { s_g0: a[0], s_g1: a[1], s_g2: a[2], s_b: a[3], truncation: T::zero() }
}

/// Integrates `I_atom(theta) S_c(k) sin(theta)` over `theta in [lo, hi]` and the
/// full azimuth for the requested components.
pub fn integrate_band<T: Real>(
    phase: &PhaseState<T>,
    optics: &Optics<T>,
    lo: T,
    hi: T,
    components: &[Component],
    quad: &QuadratureSpec<T>,
) -> Result<RateIntegral<T>> {
    let mut total = RateIntegral { rates: StructureFactorBreakdown::zero(), error: StructureFactorBreakdown::zero(), evaluations: 0 };
    let wanted: Vec<Component> = phase.kind().components().iter().copied().filter(|c| components.contains(c)).collect();
    // the zeroth-order term needs only diagonal elements (and is the only
    // sharply structured one); integrate it on its own
    let cheap_all = matches!(phase, PhaseState::Mott(_));
    let mut groups: Vec<Vec<Component>> = Vec::new();
    if cheap_all {
        groups.push(wanted.clone());
    } else {
        let (g0, rest): (Vec<_>, Vec<_>) = wanted.iter().partition(|c| **c == Component::G0);
        groups.push(g0);
        groups.push(rest);
    }
    let (period, copies) = if optics.square { (T::FRAC_PI_2(), T::lit(4.0)) } else { (T::TAU(), T::one()) };
    for group in groups.into_iter().filter(|g| !g.is_empty()) {
        let sel = Selection::only(&group);
        let directions = AtomicUsize::new(0);
        let inner = |theta: T| -> Result<[T; 4]> {
            let pre = optics.prefactor(theta) * theta.sin() * copies;
            if pre == T::zero() {
                return Ok([T::zero(); 4]);
            }
            let f = |phi: T| -> Result<[T; 4]> { Ok(to_array(&phase.evaluate(optics.transfer(theta, phi), sel)?)) };
            let r = periodic_trapezoid(&f, period, &quad.phi())?;
            directions.fetch_add(r.evaluations, Ordering::Relaxed);
            Ok(r.value.map(|v| v * pre))
        };
        let r = adaptive(&inner, lo, hi, &quad.theta())?;
        total.rates = total.rates.add(&from_array(r.value));
        total.error = total.error.add(&from_array(r.error));
        total.evaluations += directions.into_inner();
    }
    Ok(total)
}

/// Photons per second entering the detector, per component.
pub fn detector_integrate<T: Real>(
    phase: &PhaseState<T>,
    optics: &Optics<T>,
    det: &DetectorSpec<T>,
    components: &[Component],
    quad: &QuadratureSpec<T>,
) -> Result<RateIntegral<T>> {
    integrate_band(phase, optics, det.theta_stop, det.theta_max, components, quad)
}

/// Photons per second over the full sphere for the given components.
pub fn sphere_integrate<T: Real>(phase: &PhaseState<T>, optics: &Optics<T>, components: &[Component], quad: &QuadratureSpec<T>) -> Result<RateIntegral<T>> {
    integrate_band(phase, optics, T::zero(), T::PI(), components, quad)
}

/// Full-sphere rate of scattering events that leave the gas excited.
pub fn total_inelastic_rate<T: Real>(phase: &PhaseState<T>, optics: &Optics<T>, quad: &QuadratureSpec<T>) -> Result<RateIntegral<T>> {
    sphere_integrate(phase, optics, &phase.kind().inelastic_components(), quad)
}

/// `int I_atom(theta) sin(theta) dtheta dphi` over `[lo, hi]`: the rate for `S = 1`.
pub fn uniform_rate<T: Real>(optics: &Optics<T>, lo: T, hi: T) -> T {
    // int (1 + cos^2) sin = [-cos - cos^3 / 3]
    let g = |t: T| -(t.cos()) - t.cos().powi(3) / T::lit(3.0);
    optics.prefactor(T::FRAC_PI_2()) * T::TAU() * (g(hi) - g(lo))
}
