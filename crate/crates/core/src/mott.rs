//! Mott insulator at `J = 0` with thermal particle-hole pairs.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::lattice::Lattice;
use crate::matrix_elements::{dirichlet, f00};
use crate::phase::{Selection, StructureFactorBreakdown};
use crate::scalar::{Real, Vec3};

/// Relative weight below which the particle-hole series is truncated.
pub const TAIL_TOLERANCE: f64 = 1e-12;

/// `ln k!` for `k = 0..=n`.
pub fn ln_factorials<T: Real>(n: usize) -> Vec<T> {
    let mut t = Vec::with_capacity(n + 1);
    let mut acc = T::zero();
    t.push(acc);
    for k in 1..=n {
        acc = acc + T::of(k).ln();
        t.push(acc);
    }
    t
}

/// Number of ways to place `v` particle-hole pairs on `m` sites,
/// `m! / ((m - 2v)! (v!)^2)`, when it fits in `u128`.
pub fn degeneracy_exact(m: usize, v: usize) -> Option<u128> {
    if 2 * v > m {
        return Some(0);
    }
    // C(m, v) * C(m - v, v)
    let binom = |n: usize, k: usize| -> Option<u128> {
        let mut r: u128 = 1;
        for i in 0..k {
            r = r.checked_mul((n - i) as u128)? / (i as u128 + 1);
        }
        Some(r)
    };
    binom(m, v)?.checked_mul(binom(m - v, v)?)
}

/// `ln g_v` from a factorial table covering `m`.
pub fn ln_degeneracy<T: Real>(lnf: &[T], m: usize, v: usize) -> T {
    lnf[m] - lnf[m - 2 * v] - T::lit(2.0) * lnf[v]
}

/// `F(k) = prod_d sin^2(M_d k_d a / 2) / sin^2(k_d a / 2)` with `k` in units of `pi / a`.
pub fn diffraction_f<T: Real>(k: Vec3<T>, sites: [usize; 3]) -> T {
    (0..3)
        .map(|d| {
            let m = T::of(sites[d]);
            m * m * dirichlet(k[d], sites[d]).norm_sqr()
        })
        .fold(T::one(), |a, b| a * b)
}

/// Restricted canonical ensemble over particle-hole configurations.
#[derive(Debug, Clone, Serialize)]
pub struct MottEnsemble<T> {
    pub filling: u32,
    pub temperature: T,
    pub onsite: T,
    pub sites: usize,
    pub v_max: usize,
    /// `ln g_v - v U / T` for `v = 0..=v_max`.
    pub log_weights: Vec<T>,
    pub log_z: T,
    /// Bound on the omitted weight relative to `Z`.
    pub tail_bound: T,
}

impl<T: Real> MottEnsemble<T> {
    /// Builds the ensemble, extending `v_max` until the omitted tail is below
    /// `1e-12 Z` (or the lattice is exhausted).
    pub fn new(filling: u32, temperature: T, onsite: T, sites: usize, v_max: usize) -> Result<Self> {
        if filling == 0 {
            return Err(invalid("Mott filling must be a positive integer"));
        }
        if sites == 0 || !(onsite > T::zero()) || !(temperature >= T::zero()) {
            return Err(invalid("Mott ensemble needs M > 0, U > 0 and T >= 0"));
        }
        let cap = sites / 2;
        if v_max > cap {
            return Err(invalid(format!("v_max {v_max} exceeds floor(M/2) = {cap}")));
        }
        if temperature == T::zero() {
            return Ok(MottEnsemble {
                filling,
                temperature,
                onsite,
                sites,
                v_max: 0,
                log_weights: vec![T::zero()],
                log_z: T::zero(),
                tail_bound: T::zero(),
            });
        }
        let lnf = ln_factorials::<T>(sites);
        let beta_u = onsite / temperature;
        let lw = |v: usize| ln_degeneracy(&lnf, sites, v) - T::of(v) * beta_u;
        let mut weights: Vec<T> = (0..=v_max).map(lw).collect();
        let tol = T::lit(TAIL_TOLERANCE);
        let tail_of = |w: &[T], log_z: T| -> T {
            let v = w.len() - 1;
            if v >= cap {
                return T::zero();
            }
            // ratio of consecutive terms, nonincreasing in v
            let r = (lw(v + 1) - w[v]).exp();
            if r >= T::one() {
                return T::infinity();
            }
            (w[v] - log_z).exp() * r / (T::one() - r)
        };
        loop {
            let log_z = log_sum_exp(&weights);
            let tail = tail_of(&weights, log_z);
            if tail < tol {
                return Ok(MottEnsemble {
                    filling,
                    temperature,
                    onsite,
                    sites,
                    v_max: weights.len() - 1,
                    log_weights: weights,
                    log_z,
                    tail_bound: tail,
                });
            }
            let v = weights.len();
            weights.push(lw(v));
        }
    }

    pub fn probability(&self, v: usize) -> T {
        self.log_weights.get(v).map_or(T::zero(), |w| (*w - self.log_z).exp())
    }

    /// Ground-state proportion `P0 = 1 / Z`.
    pub fn ground_state_proportion(&self) -> T {
        (-self.log_z).exp()
    }

    /// Thermal mean of `<n^2>_v - n0^2 = 2 v / M`.
    pub fn number_variance(&self) -> T {
        let m = T::of(self.sites);
        (0..self.log_weights.len()).map(|v| self.probability(v) * T::lit(2.0) * T::of(v) / m).sum()
    }

    /// Mean number of particle-hole pairs.
    pub fn mean_pairs(&self) -> T {
        (0..self.log_weights.len()).map(|v| self.probability(v) * T::of(v)).sum()
    }
}

fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let m = xs.iter().copied().fold(T::neg_infinity(), T::max);
    m + xs.iter().map(|x| (*x - m).exp()).sum::<T>().ln()
}

#[derive(Debug, Clone)]
pub struct MottState<T> {
    pub lattice: Arc<Lattice<T>>,
    pub temperature: T,
    pub ensemble: MottEnsemble<T>,
}

impl<T: Real> MottState<T> {
    pub fn new(lattice: Arc<Lattice<T>>, filling: u32, temperature: T, onsite: T) -> Result<Self> {
        let ensemble = MottEnsemble::new(filling, temperature, onsite, lattice.site_count(), 0)?;
        Ok(MottState { lattice, temperature, ensemble })
    }

    pub fn atoms(&self) -> T {
        T::of(self.ensemble.sites) * T::of(self.ensemble.filling as usize)
    }

    pub fn ground_state_proportion(&self) -> T {
        self.ensemble.ground_state_proportion()
    }

    pub fn evaluate(&self, k: Vec3<T>, sel: Selection) -> StructureFactorBreakdown<T> {
        let w = f00(&self.lattice, k);
        let w2 = w * w;
        let sites = self.lattice.sites();
        let m = T::of(self.ensemble.sites);
        let n0 = T::of(self.ensemble.filling as usize);
        let f = diffraction_f(k, sites);
        let mut out = StructureFactorBreakdown::zero();
        if sel.g0 {
            out.s_g0 = w2 * n0 * n0 * f;
        }
        if sel.g1 && self.ensemble.sites > 1 {
            out.s_g1 = w2 * (m * m - f).max(T::zero()) / (m - T::one()) * self.ensemble.number_variance();
        }
        if sel.b {
            out.s_b = self.atoms() * (T::one() - w2).max(T::zero());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_degeneracies() {
        assert_eq!(degeneracy_exact(4, 0), Some(1));
        assert_eq!(degeneracy_exact(4, 1), Some(12));
        assert_eq!(degeneracy_exact(4, 2), Some(6));
        assert_eq!(degeneracy_exact(5, 3), Some(0));
        let lnf = ln_factorials::<f64>(20);
        for m in 1..=20 {
            for v in 0..=m / 2 {
                let g = degeneracy_exact(m, v).unwrap() as f64;
                assert!((ln_degeneracy(&lnf, m, v) - g.ln()).abs() < 1e-12 * g.ln().abs().max(1.0));
            }
        }
    }

    #[test]
    fn factorials_match_log_gamma() {
        use statrs::function::gamma::ln_gamma;
        let t = ln_factorials::<f64>(2000);
        for n in [1usize, 7, 100, 999, 2000] {
            assert!((t[n] - ln_gamma(n as f64 + 1.0)).abs() < 1e-9 * t[n].max(1.0));
        }
    }

    #[test]
    fn zero_temperature_ground_state() {
        let e = MottEnsemble::<f64>::new(1, 0.0, 0.4, 900, 0).unwrap();
        assert_eq!(e.ground_state_proportion(), 1.0);
        assert_eq!(e.number_variance(), 0.0);
    }

    #[test]
    fn tail_is_converged() {
        let e = MottEnsemble::<f64>::new(1, 0.033, 0.42, 900, 0).unwrap();
        assert!(e.tail_bound < 1e-12);
        let total: f64 = (0..=e.v_max).map(|v| e.probability(v)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let wider = MottEnsemble::<f64>::new(1, 0.033, 0.42, 900, e.v_max + 5).unwrap();
        assert!((wider.ground_state_proportion() - e.ground_state_proportion()).abs() < 1e-12);
    }

    #[test]
    fn p0_monotonicity() {
        let p = |t: f64, u: f64| MottEnsemble::<f64>::new(1, t, u, 100, 0).unwrap().ground_state_proportion();
        assert!(p(0.03, 0.4) > p(0.04, 0.4));
        assert!(p(0.04, 0.5) > p(0.04, 0.4));
    }

    #[test]
    fn diffraction_matches_direct_sum() {
        let sites = [4, 4, 1];
        for k in [[0.13f64, -0.41, 0.0], [1.7, 0.2, 0.9], [0.5, 0.5, 0.0], [2.0, 0.0, 0.0]] {
            let mut re = 0.0f64;
            let mut im = 0.0f64;
            for jx in 0..4 {
                for jy in 0..4 {
                    let ph = std::f64::consts::PI * (k[0] * jx as f64 + k[1] * jy as f64);
                    re += ph.cos();
                    im += ph.sin();
                }
            }
            let direct = re * re + im * im;
            assert!((diffraction_f(k, sites) - direct).abs() < 1e-10 * direct.max(1.0), "{k:?}");
        }
        assert!(diffraction_f([0.5f64, 0.0, 0.0], sites).abs() < 1e-20);
    }
}
