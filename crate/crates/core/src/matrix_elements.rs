//! Transition matrix elements `f_{q1,m1,q2,m2}(k) = int phi*_{q2,m2} phi_{q1,m1} e^{ik.r}`
//! between Bloch states normalized over the finite array, so `f_{q,q}(0) = 1`.
//!
//! Per dimension the element factorizes into a lattice factor
//! `D(kappa) = (1/M) sum_j e^{i pi kappa j}` over the `M` sites of the open
//! array and a cell overlap `O = int_cell e^{i pi kappa y} u*_{q2} u_{q1} dy`,
//! with `kappa = q1 - q2 + k` (units of `pi/a`).

use num_complex::Complex;
use serde::Serialize;

use crate::bands::BandSolution1D;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::scalar::{Real, Vec3};

/// Default magnitude of `|D|` below which a pair is dropped from lowest-band sums.
pub const DEFAULT_SPARSITY_THRESHOLD: f64 = 1e-4;

/// First site index of an `M`-site array whose cells tile `[-M/2, M/2)`.
pub fn first_site(sites: usize) -> isize {
    -((sites / 2) as isize)
}

/// Lattice factor `(1/M) sum_{j} e^{i pi kappa j}` over sites `j0..j0+M`.
pub fn dirichlet<T: Real>(kappa: T, sites: usize) -> Complex<T> {
    let m = T::of(sites);
    let j0 = T::lit(first_site(sites) as f64);
    let center = j0 + (m - T::one()) / T::lit(2.0);
    let phase = Complex::from_polar(T::one(), T::PI() * kappa * center);
    phase * dirichlet_real(kappa, sites)
}

/// Real amplitude of [`dirichlet`] about the array center.
#[inline]
pub fn dirichlet_real<T: Real>(kappa: T, sites: usize) -> T {
    let m = T::of(sites);
    // reduce pi*kappa/2 = n pi + eps; the ratio picks up (-1)^{n(M-1)}
    let half = T::PI() * kappa / T::lit(2.0);
    let n = (kappa / T::lit(2.0)).round();
    let eps = half - n * T::PI();
    let flip = n.to_i64().unwrap_or(0).rem_euclid(2) == 1 && sites % 2 == 0;
    let sign = if flip { -T::one() } else { T::one() };
    let den = eps.sin();
    let ratio = if den.abs() < T::lit(1e-9) {
        T::one() - (m * m - T::one()) * eps * eps / T::lit(6.0)
    } else {
        (m * eps).sin() / (m * den)
    };
    sign * ratio
}

/// Cell overlap `sum_d sinc(pi (kappa + 2 d)/2) G(d)` for a correlation
/// vector `G` indexed by `d = d_min..`.
#[inline]
pub fn cell_overlap<T: Real>(kappa: T, corr: &[T], d_min: isize) -> T {
    let alternating: Vec<T> = corr
        .iter()
        .enumerate()
        .map(|(i, g)| if (d_min + i as isize).rem_euclid(2) == 0 { *g } else { -*g })
        .collect();
    cell_overlap_alternating(kappa, &alternating, d_min)
}

/// [`cell_overlap`] from `(-1)^d G(d)`.
#[inline]
pub fn cell_overlap_alternating<T: Real>(kappa: T, alt: &[T], d_min: isize) -> T {
    OverlapKernel::new(kappa, d_min, alt.len()).apply(alt)
}

/// Cell-overlap weights at fixed `kappa`, reusable across correlation vectors.
///
/// Uses `sin(x + pi d) = (-1)^d sin x` so one sine serves every `d`; `kappa`
/// is reduced by its nearest even integer `2n` so the small arguments are
/// formed without cancellation.
#[derive(Debug, Clone)]
pub struct OverlapKernel<T> {
    sine: T,
    /// `1 / (pi (kappa + 2d) / 2)`, zero at a removable singularity.
    recips: Vec<T>,
    /// Index and weight of the singular term, if any.
    fix: Option<(usize, T)>,
}

impl<T: Real> OverlapKernel<T> {
    pub fn new(kappa: T, d_min: isize, width: usize) -> Self {
        let pi = T::PI();
        let n = (kappa / T::lit(2.0)).round();
        let eps = pi * (kappa - n * T::lit(2.0)) / T::lit(2.0);
        let n_int = n.to_isize().unwrap_or(0);
        let sine = if n_int.rem_euclid(2) == 0 { eps.sin() } else { -eps.sin() };
        // x_i = eps + pi * (d_min + n + i)
        let shift = d_min + n_int;
        let zero_at = -shift;
        let singular = eps.abs() < T::lit(1e-6) && zero_at >= 0 && (zero_at as usize) < width;
        let mut fix = None;
        let recips = (0..width)
            .map(|i| {
                if singular && i == zero_at as usize {
                    // sinc(eps), with the folded (-1)^d undone
                    let d = d_min + i as isize;
                    let sign = if d.rem_euclid(2) == 0 { T::one() } else { -T::one() };
                    fix = Some((i, sign * (T::one() - eps * eps / T::lit(6.0))));
                    T::zero()
                } else {
                    T::one() / (eps + pi * T::lit((shift + i as isize) as f64))
                }
            })
            .collect();
        OverlapKernel { sine, recips, fix }
    }

    #[inline]
    pub fn apply(&self, alt: &[T]) -> T {
        let mut acc = [T::zero(); 4];
        let ca = alt.chunks_exact(4);
        let cr = self.recips.chunks_exact(4);
        let mut tail = T::zero();
        for (g, r) in ca.remainder().iter().zip(cr.remainder()) {
            tail = tail + *g * *r;
        }
        for (g, r) in ca.zip(cr) {
            for i in 0..4 {
                acc[i] = acc[i] + g[i] * r[i];
            }
        }
        let mut total = self.sine * (acc[0] + acc[1] + acc[2] + acc[3] + tail);
        if let Some((i, w)) = self.fix {
            total = total + alt[i] * w;
        }
        total
    }
}

/// One-dimensional element `f_d(q1, m1 -> q2, m2; k)`.
pub fn f_element_1d<T: Real>(sol: &BandSolution1D<T>, q1: usize, m1: usize, q2: usize, m2: usize, k: T) -> Complex<T> {
    let kappa = sol.q[q1] - sol.q[q2] + k;
    let corr = sol.correlation(m1, q1, m2, q2);
    let d_min = -(2 * sol.cutoff as isize);
    dirichlet(kappa, sol.sites) * cell_overlap(kappa, &corr, d_min)
}

/// Full three-dimensional element `f_{q1,m1,q2,m2}(k)`, `k` in units of `pi/a`.
pub fn f_element<T: Real>(
    lattice: &Lattice<T>,
    q1: [usize; 3],
    m1: [usize; 3],
    q2: [usize; 3],
    m2: [usize; 3],
    k: Vec3<T>,
) -> Result<Complex<T>> {
    let mut f = Complex::new(T::one(), T::zero());
    for d in 0..3 {
        let sol = &lattice.bands.dims[d];
        if q1[d] >= sol.sites || q2[d] >= sol.sites || m1[d] >= sol.n_bands() || m2[d] >= sol.n_bands() {
            return Err(Error::IndexOutOfRange(format!("state index in dimension {d}")));
        }
        f = f * f_element_1d(sol, q1[d], m1[d], q2[d], m2[d], k[d]);
    }
    Ok(f)
}

/// `sum_{q, m < n_bands} f*_{q1,0,q,m} f_{q2,0,q,m}` in one dimension.
pub fn completeness_sum_1d<T: Real>(sol: &BandSolution1D<T>, q1: usize, q2: usize, k: T, n_bands: usize) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for m in 0..n_bands.min(sol.n_bands()) {
        for q in 0..sol.sites {
            let a = f_element_1d(sol, q1, 0, q, m, k);
            let b = f_element_1d(sol, q2, 0, q, m, k);
            acc = acc + a.conj() * b;
        }
    }
    acc
}

/// `|sum_{q, m} f*_{q1,0,q,m} f_{q2,0,q,m} - delta_{q1 q2}|` with `m_max` bands
/// retained per dimension.
pub fn sum_rule_defect<T: Real>(lattice: &Lattice<T>, q1: [usize; 3], q2: [usize; 3], k: Vec3<T>, m_max: usize) -> T {
    let mut total = Complex::new(T::one(), T::zero());
    for d in 0..3 {
        total = total * completeness_sum_1d(&lattice.bands.dims[d], q1[d], q2[d], k[d], m_max);
    }
    let delta = if q1 == q2 { T::one() } else { T::zero() };
    (total - Complex::new(delta, T::zero())).norm()
}

/// Fourier transform of the lowest-band site density, `prod_d int |w_d|^2 e^{i k_d x}`.
pub fn f00<T: Real>(lattice: &Lattice<T>, k: Vec3<T>) -> T {
    (0..3).map(|d| lattice.wanniers[d].density_transform(k[d])).fold(T::one(), |a, b| a * b)
}

/// Lowest-band pair correlations `G_{qp}(d)` for one dimension, trimmed to the
/// `d` range where any entry exceeds `1e-18`.
#[derive(Debug, Clone, Serialize)]
pub struct PairCorrelations<T> {
    pub sites: usize,
    pub d_min: isize,
    pub width: usize,
    /// `data[(q * M + p) * width + i]` holds `G_{qp}(d_min + i)`.
    pub data: Vec<T>,
    /// `(-1)^d G_{qp}(d)` in the same layout.
    pub alternating: Vec<T>,
}

impl<T: Real> PairCorrelations<T> {
    pub fn build(sol: &BandSolution1D<T>) -> Self {
        let m = sol.sites;
        let full = 4 * sol.cutoff + 1;
        let raw: Vec<Vec<T>> = (0..m * m).map(|i| sol.correlation(0, i / m, 0, i % m)).collect();
        let center = 2 * sol.cutoff;
        let mut reach = 0;
        for row in &raw {
            for (i, g) in row.iter().enumerate() {
                if g.abs() > T::lit(1e-18) {
                    reach = reach.max(i.abs_diff(center));
                }
            }
        }
        let lo = center - reach;
        let width = (2 * reach + 1).min(full);
        let mut data = Vec::with_capacity(m * m * width);
        for row in &raw {
            data.extend_from_slice(&row[lo..lo + width]);
        }
        let d_min = lo as isize - center as isize;
        let alternating = data
            .iter()
            .enumerate()
            .map(|(j, g)| if (d_min + (j % width) as isize).rem_euclid(2) == 0 { *g } else { -*g })
            .collect();
        PairCorrelations { sites: m, d_min, width, data, alternating }
    }

    #[inline]
    pub fn pair(&self, q: usize, p: usize) -> &[T] {
        let i = (q * self.sites + p) * self.width;
        &self.data[i..i + self.width]
    }

    #[inline]
    pub fn pair_alternating(&self, q: usize, p: usize) -> &[T] {
        let i = (q * self.sites + p) * self.width;
        &self.alternating[i..i + self.width]
    }
}

/// Lowest-band transition factors of one dimension at fixed `k_d`.
#[derive(Debug, Clone)]
pub struct DimFactors<T> {
    pub sites: usize,
    pub k: T,
    /// `weights[q * M + p] = |f_d(q -> p; k)|^2`.
    pub weights: Vec<T>,
    /// `sum_p weights[q, p]`.
    pub row_sums: Vec<T>,
    /// Lattice factor at `kappa = k` (shared by all diagonal elements).
    pub diag_lattice: Complex<T>,
    /// Cell overlaps of the diagonal elements `f_d(q -> q; k) / D(k)`.
    pub diag_overlap: Vec<T>,
    /// Upper bound on `sum |f|^2` dropped by the sparsity threshold.
    pub dropped: T,
}

impl<T: Real> DimFactors<T> {
    pub fn build(sol: &BandSolution1D<T>, pairs: &PairCorrelations<T>, k: T, threshold: T) -> Self {
        let m = sol.sites;
        let mut weights = vec![T::zero(); m * m];
        let mut dropped = T::zero();
        // q - p takes 2M - 1 values, so lattice factors and overlap kernels
        // are tabulated by j = (q - p) M / 2
        let half_m = T::of(m) / T::lit(2.0);
        let offset = m as isize - 1;
        let kernels: Vec<(T, OverlapKernel<T>)> = (-offset..=offset)
            .map(|j| {
                let kappa = T::lit(2.0 * j as f64) / T::of(m) + k;
                let d = dirichlet_real(kappa, m);
                (d * d, OverlapKernel::new(kappa, pairs.d_min, pairs.width))
            })
            .collect();
        for q in 0..m {
            for p in 0..m {
                let j = ((sol.q[q] - sol.q[p]) * half_m).round().to_isize().unwrap_or(0);
                let (lat, kernel) = &kernels[(j + offset) as usize];
                if *lat < threshold * threshold {
                    dropped = dropped + *lat;
                    continue;
                }
                let o = kernel.apply(pairs.pair_alternating(q, p));
                weights[q * m + p] = *lat * o * o;
            }
        }
        let row_sums = weights.chunks(m).map(|r| r.iter().copied().sum()).collect();
        let diag_overlap = (0..m).map(|q| cell_overlap(k, pairs.pair(q, q), pairs.d_min)).collect();
        DimFactors { sites: m, k, weights, row_sums, diag_lattice: dirichlet(k, m), diag_overlap, dropped }
    }

    #[inline]
    pub fn weight(&self, q: usize, p: usize) -> T {
        self.weights[q * self.sites + p]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bands::solve_bands_1d;
    use proptest::prelude::*;

    fn direct_dirichlet(kappa: f64, m: usize) -> Complex<f64> {
        let j0 = first_site(m);
        (0..m as isize)
            .map(|j| Complex::from_polar(1.0, std::f64::consts::PI * kappa * (j0 + j) as f64))
            .sum::<Complex<f64>>()
            / m as f64
    }

    #[test]
    fn dirichlet_singular_points() {
        for m in [1usize, 2, 3, 4, 7] {
            for n in -3i32..=3 {
                for eps in [0.0, 1e-11, -1e-11, 1e-7] {
                    let kappa = 2.0 * n as f64 + eps;
                    let d = dirichlet(kappa, m);
                    let e = direct_dirichlet(kappa, m);
                    assert!((d - e).norm() < 1e-9, "m={m} kappa={kappa}: {d} vs {e}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn dirichlet_matches_direct_sum(kappa in -4.0f64..4.0, m in 1usize..40) {
            prop_assert!((dirichlet(kappa, m) - direct_dirichlet(kappa, m)).norm() < 1e-10);
        }

        #[test]
        fn hermiticity(q1 in 0usize..6, q2 in 0usize..6, m2 in 0usize..3, k in -1.5f64..1.5) {
            let sol = solve_bands_1d(4.0f64, 6, 10, 3).unwrap();
            let a = f_element_1d(&sol, q1, 0, q2, m2, k);
            let b = f_element_1d(&sol, q2, m2, q1, 0, -k);
            prop_assert!((a - b.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn normalization_and_orthogonality() {
        let sol = solve_bands_1d(6.0f64, 8, 12, 4).unwrap();
        for q in 0..8 {
            assert!((f_element_1d(&sol, q, 0, q, 0, 0.0) - Complex::new(1.0, 0.0)).norm() < 1e-13);
            for p in 0..8 {
                for m in 0..4 {
                    if (p, m) != (q, 0) {
                        assert!(f_element_1d(&sol, q, 0, p, m, 0.0).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn pair_table_matches_direct_elements() {
        let sol = solve_bands_1d(8.0f64, 10, 12, 2).unwrap();
        let pairs = PairCorrelations::build(&sol);
        let f = DimFactors::build(&sol, &pairs, 0.37, 0.0);
        for q in 0..10 {
            for p in 0..10 {
                let e = f_element_1d(&sol, q, 0, p, 0, 0.37).norm_sqr();
                assert!((f.weight(q, p) - e).abs() < 1e-14);
            }
            assert!(f.row_sums[q] <= 1.0 + 1e-12);
        }
    }
}
