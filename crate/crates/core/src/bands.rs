//! One-dimensional band structure of the `V sin^2(pi x / a)` lattice.
//!
//! Lengths are in units of the lattice spacing `a`, quasimomenta in units of
//! `pi/a` and energies in recoil energies. In the plane-wave basis
//! `exp(i pi (q + 2 l) x)`, `l = -L..=L`, the Hamiltonian is tridiagonal with
//! diagonal `(2l + q)^2 + V/2` and off-diagonal `-V/4`.

use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::symmetric_tridiagonal;
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use crate::system::{LatticeSpec, SpeciesSpec};

/// Energies below this change when the cutoff grows by half are considered converged.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct BandSolution1D<T> {
    pub depth: T,
    pub sites: usize,
    pub cutoff: usize,
    /// Quasimomenta `2n/M` folded into `(-1, 1]`, indexed by `n = 0..M`.
    pub q: Vec<T>,
    /// `energies[m][iq]`, ascending in `m`.
    pub energies: Vec<Vec<T>>,
    /// `coeffs[m][iq][l + L]`, real, unit norm, gauge `sum_l c_l > 0`.
    pub coeffs: Vec<Vec<Vec<T>>>,
}

/// Quasimomentum grid `2n/M` folded into `(-1, 1]` (units of `pi/a`).
pub fn quasimomentum_grid<T: Real>(sites: usize) -> Vec<T> {
    (0..sites)
        .map(|n| {
            let q = T::lit(2.0) * T::of(n) / T::of(sites);
            if q > T::one() {
                q - T::lit(2.0)
            } else {
                q
            }
        })
        .collect()
}

fn diagonalize<T: Real>(depth: T, q: T, cutoff: usize) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let n = 2 * cutoff + 1;
    let half = depth / T::lit(2.0);
    let diag: Vec<T> = (0..n)
        .map(|i| {
            let l = T::of(i) - T::of(cutoff);
            let p = T::lit(2.0) * l + q;
            p * p + half
        })
        .collect();
    let off = vec![-depth / T::lit(4.0); n - 1];
    let eig = symmetric_tridiagonal(&diag, &off)?;
    Ok((eig.values, eig.vectors))
}

fn fix_gauge<T: Real>(v: &mut [T]) {
    let sum: T = v.iter().copied().sum();
    let sign = if sum.abs() > T::lit(1e-10) {
        sum.signum()
    } else {
        // odd states: first coefficient of appreciable size made positive
        let big = v.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
        let first = v.iter().find(|x| x.abs() > big * T::lit(1e-6)).copied().unwrap_or(T::one());
        first.signum()
    };
    if sign < T::zero() {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Solves the band problem on the `M`-point quasimomentum grid.
pub fn solve_bands_1d<T: Real>(depth: T, sites: usize, cutoff: usize, n_bands: usize) -> Result<BandSolution1D<T>> {
    if sites == 0 || n_bands == 0 {
        return Err(invalid("need at least one site and one band"));
    }
    if 2 * cutoff + 1 <= n_bands {
        return Err(invalid("plane-wave cutoff too small for the requested bands"));
    }
    if !(depth >= T::zero()) {
        return Err(invalid("lattice depth must be non-negative"));
    }
    let q = quasimomentum_grid::<T>(sites);
    let bigger = cutoff + cutoff.div_ceil(2).max(1);
    let tol = T::lit(CONVERGENCE_TOLERANCE);
    let per_q: Vec<(Vec<T>, Vec<Vec<T>>)> = q
        .par_iter()
        .enumerate()
        .map(|(iq, &qv)| {
            let (vals, vecs) = diagonalize(depth, qv, cutoff)?;
            let (check, _) = diagonalize(depth, qv, bigger)?;
            for m in 0..n_bands {
                let delta = (vals[m] - check[m]).abs();
                if delta > tol {
                    return Err(Error::BandsNotConverged { band: m, q: iq, delta: delta.to_f64_lossy() });
                }
            }
            let vecs = vecs
                .into_iter()
                .take(n_bands)
                .map(|mut v| {
                    fix_gauge(&mut v);
                    v
                })
                .collect();
            Ok((vals[..n_bands].to_vec(), vecs))
        })
        .collect::<Result<_>>()?;
    let mut energies = vec![Vec::with_capacity(sites); n_bands];
    let mut coeffs = vec![Vec::with_capacity(sites); n_bands];
    for (vals, vecs) in per_q {
        for (m, (e, c)) in vals.into_iter().zip(vecs).enumerate() {
            energies[m].push(e);
            coeffs[m].push(c);
        }
    }
    Ok(BandSolution1D { depth, sites, cutoff, q, energies, coeffs })
}

impl<T: Real> BandSolution1D<T> {
    pub fn n_bands(&self) -> usize {
        self.energies.len()
    }

    /// Index of the quasimomentum `-q` (modulo reciprocal lattice).
    pub fn neg_index(&self, iq: usize) -> usize {
        (self.sites - iq) % self.sites
    }

    /// Lowest-band width `max E - min E`.
    pub fn lowest_bandwidth(&self) -> T {
        let e = &self.energies[0];
        let hi = e.iter().copied().fold(T::neg_infinity(), T::max);
        let lo = e.iter().copied().fold(T::infinity(), T::min);
        hi - lo
    }

    /// Coefficient autocorrelation `G(d) = sum_l c_l c'_{l-d}` for `d = -2L..=2L`,
    /// between band `m1` at `iq1` and band `m2` at `iq2`.
    pub fn correlation(&self, m1: usize, iq1: usize, m2: usize, iq2: usize) -> Vec<T> {
        let c1 = &self.coeffs[m1][iq1];
        let c2 = &self.coeffs[m2][iq2];
        let n = c1.len() as isize;
        (-(n - 1)..n)
            .map(|d| {
                let mut s = T::zero();
                for l in 0..n {
                    let j = l - d;
                    if (0..n).contains(&j) {
                        s = s + c1[l as usize] * c2[j as usize];
                    }
                }
                s
            })
            .collect()
    }

    /// Evaluates the Bloch function `phi_{q,m}(x)` normalized over the `M`-site box.
    pub fn bloch(&self, m: usize, iq: usize, x: T) -> (T, T) {
        let q = self.q[iq];
        let norm = T::one() / T::of(self.sites).sqrt();
        let mut re = T::zero();
        let mut im = T::zero();
        for (i, &c) in self.coeffs[m][iq].iter().enumerate() {
            let l = T::of(i) - T::of(self.cutoff);
            let (s, co) = (T::PI() * (q + T::lit(2.0) * l) * x).sin_cos();
            re = re + c * co;
            im = im + c * s;
        }
        (re * norm, im * norm)
    }
}

/// Real-space samples of a Wannier function on a uniform grid (units of `a`).
#[derive(Debug, Clone, Serialize)]
pub struct Wannier1D<T> {
    pub band: usize,
    pub x: Vec<T>,
    pub values: Vec<T>,
    pub step: T,
    pub samples_per_site: usize,
}

/// Builds `w_m(x) = M^{-1/2} sum_q phi_{q,m}(x)` on a window of at most 21
/// sites centered on the origin.
pub fn wannier_from_bloch<T: Real>(sol: &BandSolution1D<T>, m: usize) -> Result<Wannier1D<T>> {
    if m >= sol.n_bands() {
        return Err(Error::IndexOutOfRange(format!("band {m} of {}", sol.n_bands())));
    }
    let window = sol.sites.min(21);
    let samples_per_site = 4 * (2 * sol.cutoff + 1) + 8;
    let total = window * samples_per_site;
    let step = T::one() / T::of(samples_per_site);
    let start = -T::of(window) / T::lit(2.0);
    let scale = T::one() / T::of(sol.sites).sqrt();
    let x: Vec<T> = (0..total).map(|i| start + T::of(i) * step).collect();
    let samples: Vec<(T, T)> = x
        .par_iter()
        .map(|&xv| {
            let mut re = T::zero();
            let mut im = T::zero();
            for iq in 0..sol.sites {
                let (r, i) = sol.bloch(m, iq, xv);
                re = re + r;
                im = im + i;
            }
            (re * scale, im * scale)
        })
        .collect();
    let peak = samples.iter().fold(T::zero(), |acc, s| acc.max(s.0.abs()));
    let worst_imag = samples.iter().fold(T::zero(), |acc, s| acc.max(s.1.abs()));
    if m == 0 && worst_imag > T::lit(1e-7) * peak {
        return Err(Error::Gauge(format!(
            "imaginary part {worst_imag:e} against peak {peak:e}"
        )));
    }
    let values: Vec<T> = samples.iter().map(|s| s.0).collect();
    if m == 0 && sol.sites >= 3 {
        let center = values[total / 2].abs();
        let edge = values[0].abs();
        if !(center >= peak * T::lit(0.999)) || !(edge < center) {
            return Err(Error::Gauge("lowest-band Wannier function is not site-centered".into()));
        }
    }
    Ok(Wannier1D { band: m, x, values, step, samples_per_site })
}

impl<T: Real> Wannier1D<T> {
    pub fn norm(&self) -> T {
        self.values.iter().map(|w| *w * *w).sum::<T>() * self.step
    }

    /// `int |w|^4 dx` in units of `1/a`.
    pub fn quartic(&self) -> T {
        self.values.iter().map(|w| (*w * *w) * (*w * *w)).sum::<T>() * self.step
    }

    /// `int |w(x)|^2 exp(i pi k x) dx` for `k` in units of `pi/a`; real by symmetry.
    pub fn density_transform(&self, k: T) -> T {
        self.x
            .iter()
            .zip(&self.values)
            .map(|(&x, &w)| w * w * (T::PI() * k * x).cos())
            .sum::<T>()
            * self.step
    }

    /// `int w(x) w(x - n a) dx`.
    pub fn shifted_overlap(&self, n: usize) -> T {
        let shift = n * self.samples_per_site;
        if shift >= self.values.len() {
            return T::zero();
        }
        self.values[shift..]
            .iter()
            .zip(&self.values)
            .map(|(a, b)| *a * *b)
            .sum::<T>()
            * self.step
    }
}

/// Tunneling `J = -(1/M) sum_q E(q) e^{iqa}`, in E_R.
pub fn hubbard_j<T: Real>(sol: &BandSolution1D<T>) -> T {
    let m = T::of(sol.sites);
    let s: T = sol
        .q
        .iter()
        .zip(&sol.energies[0])
        .map(|(&q, &e)| e * (T::PI() * q).cos())
        .sum();
    (-s / m).abs()
}

/// Contact coupling `8 a_s / (pi a)` in E_R: `4 pi hbar^2 a_s / (m a^3)` divided by E_R.
pub fn interaction_scale<T: Real>(lattice: &LatticeSpec<T>, species: &SpeciesSpec<T>) -> T {
    T::lit(8.0) * species.scattering_length / (T::PI() * lattice.spacing)
}

/// On-site interaction `U = (4 pi hbar^2 a_s / m) prod_d int |w_d|^4`, in E_R.
pub fn hubbard_u<T: Real>(wanniers: [&Wannier1D<T>; 3], lattice: &LatticeSpec<T>, species: &SpeciesSpec<T>) -> T {
    interaction_scale(lattice, species) * wanniers.iter().map(|w| w.quartic()).fold(T::one(), |a, b| a * b)
}

/// Band solutions for the three directions of a separable lattice.
#[derive(Debug, Clone, Serialize)]
pub struct Bands3D<T> {
    pub dims: [BandSolution1D<T>; 3],
}

impl<T: Real> Bands3D<T> {
    pub fn solve(spec: &LatticeSpec<T>) -> Result<Self> {
        spec.validate()?;
        let solve = |d: usize| solve_bands_1d(spec.depths[d], spec.sites[d], spec.cutoff, spec.n_bands);
        Ok(Bands3D { dims: [solve(0)?, solve(1)?, solve(2)?] })
    }

    /// `E(q, m) = sum_d E_d(q_d, m_d)`.
    pub fn band_energy_3d(&self, q: [usize; 3], m: [usize; 3]) -> Result<T> {
        let mut e = T::zero();
        for d in 0..3 {
            let sol = &self.dims[d];
            if q[d] >= sol.sites || m[d] >= sol.n_bands() {
                return Err(Error::IndexOutOfRange(format!(
                    "dimension {d}: q index {} of {}, band {} of {}",
                    q[d],
                    sol.sites,
                    m[d],
                    sol.n_bands()
                )));
            }
            e = e + sol.energies[m[d]][q[d]];
        }
        Ok(e)
    }
}
