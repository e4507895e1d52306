//! A solved lattice: band structures, lowest-band Wannier functions, and the
//! lowest-band transition tables shared by every phase.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex;

use crate::bands::{wannier_from_bloch, Bands3D, Wannier1D};
use crate::error::Result;
use crate::matrix_elements::{cell_overlap, dirichlet, DimFactors, PairCorrelations, DEFAULT_SPARSITY_THRESHOLD};
use crate::scalar::{Real, Vec3};
use crate::system::LatticeSpec;

/// Memoized per-dimension tables are capped at about this many stored weights.
const CACHE_WEIGHTS: usize = 1 << 25;

#[derive(Debug)]
pub struct Lattice<T> {
    pub spec: LatticeSpec<T>,
    pub bands: Bands3D<T>,
    pub wanniers: [Wannier1D<T>; 3],
    pub pairs: [PairCorrelations<T>; 3],
    /// Lowest-band energies `E(q)` on the flattened grid `q = (qx*My + qy)*Mz + qz`.
    pub energies: Vec<T>,
    pub threshold: T,
    cache: Mutex<HashMap<(usize, u64), Arc<DimFactors<T>>>>,
}

impl<T: Real> Lattice<T> {
    pub fn build(spec: &LatticeSpec<T>) -> Result<Self> {
        let bands = Bands3D::solve(spec)?;
        let wanniers = [
            wannier_from_bloch(&bands.dims[0], 0)?,
            wannier_from_bloch(&bands.dims[1], 0)?,
            wannier_from_bloch(&bands.dims[2], 0)?,
        ];
        let pairs = [
            PairCorrelations::build(&bands.dims[0]),
            PairCorrelations::build(&bands.dims[1]),
            PairCorrelations::build(&bands.dims[2]),
        ];
        let [mx, my, mz] = spec.sites;
        let mut energies = Vec::with_capacity(mx * my * mz);
        for qx in 0..mx {
            for qy in 0..my {
                for qz in 0..mz {
                    energies.push(
                        bands.dims[0].energies[0][qx] + bands.dims[1].energies[0][qy] + bands.dims[2].energies[0][qz],
                    );
                }
            }
        }
        Ok(Lattice {
            spec: spec.clone(),
            bands,
            wanniers,
            pairs,
            energies,
            threshold: T::lit(DEFAULT_SPARSITY_THRESHOLD),
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn with_threshold(mut self, threshold: T) -> Self {
        self.threshold = threshold;
        self.cache.lock().expect("cache poisoned").clear();
        self
    }

    pub fn sites(&self) -> [usize; 3] {
        self.spec.sites
    }

    pub fn site_count(&self) -> usize {
        self.spec.site_count()
    }

    pub fn flat(&self, q: [usize; 3]) -> usize {
        let [_, my, mz] = self.spec.sites;
        (q[0] * my + q[1]) * mz + q[2]
    }

    pub fn unflat(&self, i: usize) -> [usize; 3] {
        let [_, my, mz] = self.spec.sites;
        [i / (my * mz), (i / mz) % my, i % mz]
    }

    /// Flattened index of `-q`.
    pub fn neg(&self, i: usize) -> usize {
        let q = self.unflat(i);
        let b = &self.bands.dims;
        self.flat([b[0].neg_index(q[0]), b[1].neg_index(q[1]), b[2].neg_index(q[2])])
    }

    pub fn ground_energy(&self) -> T {
        self.energies[0]
    }

    /// Lowest-band factors of dimension `d` at `k_d`, memoized by the bit pattern of `k_d`.
    pub fn dim_factors(&self, d: usize, k: T) -> Arc<DimFactors<T>> {
        let key = (d, k.to_f64_lossy().to_bits());
        if let Some(f) = self.cache.lock().expect("cache poisoned").get(&key) {
            return f.clone();
        }
        let f = Arc::new(DimFactors::build(&self.bands.dims[d], &self.pairs[d], k, self.threshold));
        let mut cache = self.cache.lock().expect("cache poisoned");
        let limit = (CACHE_WEIGHTS / (f.sites * f.sites)).clamp(64, 4096);
        if cache.len() >= limit {
            cache.clear();
        }
        cache.insert(key, f.clone());
        f
    }

    /// Diagonal elements only, without building the full transition tables.
    pub fn diagonal(&self, k: Vec3<T>) -> DiagonalTable<T> {
        let per_dim: Vec<Vec<T>> = (0..3)
            .map(|d| {
                let p = &self.pairs[d];
                (0..p.sites).map(|q| cell_overlap(k[d], p.pair(q, q), p.d_min)).collect()
            })
            .collect();
        let lattice_sq = (0..3).map(|d| dirichlet(k[d], self.spec.sites[d]).norm_sqr()).fold(T::one(), |a, b| a * b);
        DiagonalTable { lattice_sq, overlap: outer(self.spec.sites, |d, q| per_dim[d][q]) }
    }

    pub fn table(&self, k: Vec3<T>) -> TransitionTable<T> {
        TransitionTable {
            dims: [self.dim_factors(0, k[0]), self.dim_factors(1, k[1]), self.dim_factors(2, k[2])],
            sites: self.spec.sites,
        }
    }
}

/// `f_{q,q}(k) = D(k) * overlap_q`: the lattice factor is shared by all `q`.
#[derive(Debug, Clone)]
pub struct DiagonalTable<T> {
    /// `|D_x D_y D_z|^2`.
    pub lattice_sq: T,
    /// Flattened real cell overlaps.
    pub overlap: Vec<T>,
}

impl<T: Real> DiagonalTable<T> {
    /// `|f_{q,q}|^2` for flattened `q`.
    pub fn weight(&self, i: usize) -> T {
        self.lattice_sq * self.overlap[i] * self.overlap[i]
    }
}

fn outer<T: Real>(sites: [usize; 3], f: impl Fn(usize, usize) -> T) -> Vec<T> {
    let [mx, my, mz] = sites;
    let mut out = Vec::with_capacity(mx * my * mz);
    for qx in 0..mx {
        let fx = f(0, qx);
        for qy in 0..my {
            let fxy = fx * f(1, qy);
            for qz in 0..mz {
                out.push(fxy * f(2, qz));
            }
        }
    }
    out
}

/// Lowest-band `|f_{q,p}(k)|^2 = prod_d |f_d|^2` at one momentum transfer, with
/// separable matrix-vector products over the flattened quasimomentum grid.
#[derive(Debug, Clone)]
pub struct TransitionTable<T> {
    pub dims: [Arc<DimFactors<T>>; 3],
    pub sites: [usize; 3],
}

impl<T: Real> TransitionTable<T> {
    pub fn len(&self) -> usize {
        self.sites.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `|f_{q,p}|^2` for flattened indices.
    pub fn weight(&self, q: [usize; 3], p: [usize; 3]) -> T {
        (0..3).map(|d| self.dims[d].weight(q[d], p[d])).fold(T::one(), |a, b| a * b)
    }

    /// `sum_p |f_{q,p}|^2` for every `q`.
    pub fn row_sums(&self) -> Vec<T> {
        self.outer(|d, q| self.dims[d].row_sums[q])
    }

    /// `|f_{q,q}|^2` for every `q`.
    pub fn diagonal(&self) -> Vec<T> {
        self.outer(|d, q| self.dims[d].weight(q, q))
    }

    /// Real cell-overlap product of the diagonal elements; `f_{q,q} = D(k) * overlap_q`.
    pub fn diagonal_overlap(&self) -> Vec<T> {
        self.outer(|d, q| self.dims[d].diag_overlap[q])
    }

    /// `|D_x D_y D_z|^2` at `kappa = k`.
    pub fn diagonal_lattice_sq(&self) -> T {
        self.dims.iter().map(|f| f.diag_lattice.norm_sqr()).fold(T::one(), |a, b| a * b)
    }

    pub fn diagonal_lattice(&self) -> Complex<T> {
        self.dims.iter().fold(Complex::new(T::one(), T::zero()), |a, f| a * f.diag_lattice)
    }

    /// Bound on the weight dropped by the sparsity threshold, per initial state.
    pub fn dropped_bound(&self) -> T {
        let [a, b, c] = &self.dims;
        let keep = |f: &DimFactors<T>| T::one() + f.dropped;
        keep(a) * keep(b) * keep(c) - T::one()
    }

    fn outer(&self, f: impl Fn(usize, usize) -> T) -> Vec<T> {
        outer(self.sites, f)
    }

    pub fn diagonal_table(&self) -> DiagonalTable<T> {
        DiagonalTable { lattice_sq: self.diagonal_lattice_sq(), overlap: self.diagonal_overlap() }
    }

    /// `out[q] = sum_p |f_{q,p}|^2 b[p]`, contracted one dimension at a time.
    pub fn apply(&self, b: &[T]) -> Vec<T> {
        let [mx, my, mz] = self.sites;
        assert_eq!(b.len(), mx * my * mz);
        let (bx, by, bz) = (&self.dims[0], &self.dims[1], &self.dims[2]);
        let block = my * mz;
        // z contraction
        let t1: Vec<T> = if mz == 1 {
            let w = bz.weights[0];
            b.iter().map(|v| *v * w).collect()
        } else {
            let mut t = vec![T::zero(); b.len()];
            for (src, dst) in b.chunks(mz).zip(t.chunks_mut(mz)) {
                for (qz, out) in dst.iter_mut().enumerate() {
                    *out = dot(&bz.weights[qz * mz..(qz + 1) * mz], src);
                }
            }
            t
        };
        // y contraction within each x block
        let mut t2 = vec![T::zero(); b.len()];
        for (src, dst) in t1.chunks(block).zip(t2.chunks_mut(block)) {
            if mz == 1 {
                for (qy, out) in dst.iter_mut().enumerate() {
                    *out = dot(&by.weights[qy * my..(qy + 1) * my], src);
                }
            } else {
                for qy in 0..my {
                    let out = &mut dst[qy * mz..(qy + 1) * mz];
                    for (py, &w) in by.weights[qy * my..(qy + 1) * my].iter().enumerate() {
                        if w != T::zero() {
                            axpy(w, &src[py * mz..(py + 1) * mz], out);
                        }
                    }
                }
            }
        }
        // x contraction across blocks
        let mut t3 = vec![T::zero(); b.len()];
        for (qx, out) in t3.chunks_mut(block).enumerate() {
            for (px, &w) in bx.weights[qx * mx..(qx + 1) * mx].iter().enumerate() {
                if w != T::zero() {
                    axpy(w, &t2[px * block..(px + 1) * block], out);
                }
            }
        }
        t3
    }

    /// [`apply`](Self::apply) for `B` vectors at once, interleaved as `b[p][i]`.
    pub fn apply_batch<const B: usize>(&self, b: &[[T; B]]) -> Vec<[T; B]> {
        let [mx, my, mz] = self.sites;
        assert_eq!(b.len(), mx * my * mz);
        let (bx, by, bz) = (&self.dims[0], &self.dims[1], &self.dims[2]);
        let block = my * mz;
        // out[q, r] = sum_p w[q, p] src[p, r], one matrix product per block
        let contract = |w: &[T], m: usize, src: &[[T; B]], dst: &mut [[T; B]]| {
            let cols = src.len() / m * B;
            T::gemm(m, m, cols, w, src.as_flattened(), dst.as_flattened_mut());
        };
        let t1: Vec<[T; B]> = if mz == 1 {
            let w = bz.weights[0];
            b.iter().map(|v| v.map(|x| x * w)).collect()
        } else {
            let mut t = vec![[T::zero(); B]; b.len()];
            for (src, dst) in b.chunks(mz).zip(t.chunks_mut(mz)) {
                contract(&bz.weights, mz, src, dst);
            }
            t
        };
        let mut t2 = vec![[T::zero(); B]; b.len()];
        for (src, dst) in t1.chunks(block).zip(t2.chunks_mut(block)) {
            contract(&by.weights, my, src, dst);
        }
        let mut t3 = vec![[T::zero(); B]; b.len()];
        contract(&bx.weights, mx, &t2, &mut t3);
        t3
    }

    /// `sum_{q,p} a_q |f_{q,p}|^2 b_p`.
    pub fn bilinear(&self, a: &[T], b: &[T]) -> T {
        let t = self.apply(b);
        a.iter().zip(&t).map(|(x, y)| *x * *y).sum()
    }
}

/// Dot product with independent partial sums (lets the compiler vectorize).
#[inline]
fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let mut acc = [T::zero(); 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let tail: T = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| *x * *y).sum();
    for (x, y) in ca.zip(cb) {
        for i in 0..8 {
            acc[i] = acc[i] + x[i] * y[i];
        }
    }
    acc.iter().copied().sum::<T>() + tail
}

#[inline]
fn axpy<T: Real>(w: T, x: &[T], y: &mut [T]) {
    for (o, v) in y.iter_mut().zip(x) {
        *o = *o + w * *v;
    }
}
