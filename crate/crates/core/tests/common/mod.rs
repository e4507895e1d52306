//! Independent reference calculations shared by the integration tests.
#![allow(dead_code)]

pub mod compare;

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use lattice_light::bands::BandSolution1D;
use lattice_light::lattice::Lattice;
use lattice_light::matrix_elements::first_site;
use lattice_light::quadrature::gauss_legendre;
use lattice_light::system::LatticeSpec;

pub fn lattice(sites: [usize; 3], depths: [f64; 3]) -> Arc<Lattice<f64>> {
    let spec = LatticeSpec::new(sites, depths, 1.0).unwrap();
    Arc::new(Lattice::build(&spec).unwrap())
}

/// Integral over the `M`-cell box centred on sites `j0..j0+M` by 48-point
/// Gauss-Legendre per cell (`x` in units of `a`).
pub fn box_integral(sites: usize, f: impl Fn(f64) -> Complex64) -> Complex64 {
    let (x, w) = gauss_legendre::<f64>(48);
    let j0 = first_site(sites) as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for cell in 0..sites {
        let mid = j0 + cell as f64;
        for (xi, wi) in x.iter().zip(&w) {
            acc += f(mid + 0.5 * xi) * (0.5 * wi);
        }
    }
    acc
}

pub fn bloch(sol: &BandSolution1D<f64>, m: usize, q: usize, x: f64) -> Complex64 {
    let (re, im) = sol.bloch(m, q, x);
    Complex64::new(re, im)
}

/// `f_d = int phi*_{q2,m2} phi_{q1,m1} e^{i pi k x} dx` by direct quadrature.
pub fn f_real_space_1d(sol: &BandSolution1D<f64>, q1: usize, m1: usize, q2: usize, m2: usize, k: f64) -> Complex64 {
    box_integral(sol.sites, |x| {
        bloch(sol, m2, q2, x).conj() * bloch(sol, m1, q1, x) * Complex64::from_polar(1.0, std::f64::consts::PI * k * x)
    })
}

pub fn f_real_space(lat: &Lattice<f64>, q1: [usize; 3], m1: [usize; 3], q2: [usize; 3], m2: [usize; 3], k: [f64; 3]) -> Complex64 {
    (0..3)
        .map(|d| f_real_space_1d(&lat.bands.dims[d], q1[d], m1[d], q2[d], m2[d], k[d]))
        .product()
}

/// `int phi*_a phi*_b phi_c phi_d` over the box for one dimension (lowest band).
pub fn quartic_1d(sol: &BandSolution1D<f64>, q: [usize; 4]) -> Complex64 {
    box_integral(sol.sites, |x| {
        bloch(sol, 0, q[0], x).conj() * bloch(sol, 0, q[1], x).conj() * bloch(sol, 0, q[2], x) * bloch(sol, 0, q[3], x)
    })
}

/// Lowest-band `|f_{q,p}(k)|^2` matrix on the flattened grid, from real-space quadrature.
pub fn lowest_band_f(lat: &Lattice<f64>, k: [f64; 3]) -> Vec<Vec<Complex64>> {
    let m = lat.site_count();
    let per_dim: Vec<Vec<Vec<Complex64>>> = (0..3)
        .map(|d| {
            let sol = &lat.bands.dims[d];
            (0..sol.sites)
                .map(|a| (0..sol.sites).map(|b| f_real_space_1d(sol, a, 0, b, 0, k[d])).collect())
                .collect()
        })
        .collect();
    let mut f = vec![vec![Complex64::new(0.0, 0.0); m]; m];
    for (i, row) in f.iter_mut().enumerate() {
        let qi = lat.unflat(i);
        for (j, v) in row.iter_mut().enumerate() {
            let qj = lat.unflat(j);
            *v = (0..3).map(|d| per_dim[d][qi[d]][qj[d]]).product();
        }
    }
    f
}

/// Grand-canonical enumeration of all lowest-band Fock states of spinless
/// fermions. Returns `(<N>, <A^dag A>)` with `A = sum f_{b,a} c^dag_a c_b`.
pub fn fermion_fock_gc(energies: &[f64], f: &[Vec<Complex64>], mu: f64, t: f64) -> (f64, f64) {
    let m = energies.len();
    assert!(m <= 16);
    let dim = 1usize << m;
    let mut z = 0.0;
    let mut n_acc = 0.0;
    let mut s_acc = 0.0;
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for state in 0..dim {
        let n = state.count_ones() as f64;
        let e: f64 = (0..m).filter(|&i| state >> i & 1 == 1).map(|i| energies[i]).sum();
        let w = (-(e - mu * n) / t).exp();
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for b in 0..m {
            if state >> b & 1 == 0 {
                continue;
            }
            let s1 = state & !(1 << b);
            let sign1 = parity(state, b);
            for a in 0..m {
                if s1 >> a & 1 == 1 {
                    continue;
                }
                let s2 = s1 | (1 << a);
                let sign = sign1 * parity(s1, a);
                out[s2] += f[b][a] * sign;
            }
        }
        let norm: f64 = out.iter().map(|v| v.norm_sqr()).sum();
        z += w;
        n_acc += w * n;
        s_acc += w * norm;
    }
    (n_acc / z, s_acc / z)
}

/// Canonical version of [`fermion_fock_gc`] at fixed particle number.
pub fn fermion_fock_canonical(energies: &[f64], f: &[Vec<Complex64>], atoms: u32, t: f64) -> f64 {
    let m = energies.len();
    let dim = 1usize << m;
    let emin = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut z = 0.0;
    let mut s_acc = 0.0;
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for state in (0..dim).filter(|s| s.count_ones() == atoms) {
        let e: f64 = (0..m).filter(|&i| state >> i & 1 == 1).map(|i| energies[i] - emin).sum();
        let w = (-e / t).exp();
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for b in (0..m).filter(|&b| state >> b & 1 == 1) {
            let s1 = state & !(1 << b);
            let sign1 = parity(state, b);
            for a in (0..m).filter(|&a| s1 >> a & 1 == 0) {
                out[s1 | (1 << a)] += f[b][a] * (sign1 * parity(s1, a));
            }
        }
        z += w;
        s_acc += w * out.iter().map(|v| v.norm_sqr()).sum::<f64>();
    }
    s_acc / z
}

fn parity(state: usize, i: usize) -> f64 {
    if (state & ((1 << i) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// All site-occupation vectors with `total` bosons on `sites` sites.
pub fn number_states(sites: usize, total: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, sites: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() + 1 == sites {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for n in 0..=left {
            cur.push(n);
            rec(left - n, sites, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, sites, &mut Vec::new(), &mut out);
    out
}

/// Canonical J=0 Bose-Hubbard ensemble over every number state. Returns the
/// ground-state weight and `sum_{jl} <n_j n_l> e^{i k.(r_j - r_l)}`.
pub fn mott_full_enumeration(positions: &[[f64; 3]], filling: usize, u: f64, t: f64, k: [f64; 3]) -> (f64, f64) {
    let m = positions.len();
    let states = number_states(m, m * filling);
    let phases: Vec<Complex64> = positions
        .iter()
        .map(|r| Complex64::from_polar(1.0, std::f64::consts::PI * (k[0] * r[0] + k[1] * r[1] + k[2] * r[2])))
        .collect();
    let mut z = 0.0;
    let mut ground = 0.0;
    let mut acc = 0.0;
    for s in &states {
        let e: f64 = s.iter().map(|&n| 0.5 * u * (n * n.saturating_sub(1)) as f64).sum();
        let w = if t == 0.0 {
            if e == 0.0 { 1.0 } else { 0.0 }
        } else {
            (-e / t).exp()
        };
        if s.iter().all(|&n| n == filling) {
            ground += w;
        }
        let amp: Complex64 = s.iter().zip(&phases).map(|(&n, p)| p * n as f64).sum();
        z += w;
        acc += w * amp.norm_sqr();
    }
    (ground / z, acc / z)
}

/// Exact two-mode (q = 0 and the zone edge) Bose-Hubbard results for `n`
/// bosons on a two-site lattice.
pub struct TwoMode {
    /// `<n_0>`, `<n_Q>`
    pub populations: [f64; 2],
    /// `<A_d^dag A_d>` for the number-conserving part `f_00 n_0 + f_QQ n_Q`.
    pub diagonal: f64,
    /// `<A_o^dag A_o>` for the transfer part `f_{Q,0} b^dag_0 b_Q + f_{0,Q} b^dag_Q b_0`.
    pub transfer: f64,
}

/// `energies = [E_0, E_Q]`, `u[a][b][c][d] = U_{abcd}` for modes `0, Q`,
/// `f[a][b] = f_{a,b}(k)`. Thermal canonical average at temperature `t`.
pub fn two_mode(n: usize, energies: [f64; 2], u: &[[[[Complex64; 2]; 2]; 2]; 2], f: [[Complex64; 2]; 2], t: f64) -> TwoMode {
    // basis |n_Q> with n_0 = n - n_Q; weights above n_Q = 120 are far below
    // double precision for the weak couplings used here
    let dim = n.min(120) + 1;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    let amp = |occ: &mut [usize; 2], mode: usize, create: bool| -> f64 {
        if create {
            occ[mode] += 1;
            (occ[mode] as f64).sqrt()
        } else if occ[mode] == 0 {
            0.0
        } else {
            let a = (occ[mode] as f64).sqrt();
            occ[mode] -= 1;
            a
        }
    };
    for col in 0..dim {
        let occ0 = [n - col, col];
        h[(col, col)] += energies[0] * occ0[0] as f64 + energies[1] * occ0[1] as f64;
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        let w = u[a][b][c][d];
                        if w.norm() < 1e-15 {
                            continue;
                        }
                        let mut occ = occ0;
                        let mut x = amp(&mut occ, d, false);
                        x *= amp(&mut occ, c, false);
                        x *= amp(&mut occ, b, true);
                        x *= amp(&mut occ, a, true);
                        if x == 0.0 {
                            continue;
                        }
                        let row = occ[1];
                        if row >= dim {
                            continue;
                        }
                        // the Hamiltonian is real for real Bloch gauges; keep the real part
                        h[(row, col)] += 0.5 * w.re * x;
                    }
                }
            }
        }
    }
    let h = (&h + h.transpose()) * 0.5;
    let eig = SymmetricEigen::new(h);
    let e0 = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&e| if t == 0.0 { if (e - e0).abs() < 1e-12 { 1.0 } else { 0.0 } } else { (-(e - e0) / t).exp() })
        .collect();
    let z: f64 = weights.iter().sum();
    let mut pops = [0.0; 2];
    let mut diagonal = 0.0;
    let mut transfer = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        if w < 1e-300 {
            continue;
        }
        let v = eig.eigenvectors.column(i);
        let mut ad = vec![Complex64::new(0.0, 0.0); dim];
        let mut ao = vec![Complex64::new(0.0, 0.0); dim];
        for nq in 0..dim {
            let c = v[nq];
            let n0 = n - nq;
            pops[0] += w * c * c * n0 as f64;
            pops[1] += w * c * c * nq as f64;
            ad[nq] += (f[0][0] * n0 as f64 + f[1][1] * nq as f64) * c;
            // b^dag_0 b_Q: nq -> nq - 1
            if nq > 0 {
                ao[nq - 1] += f[1][0] * (c * ((nq as f64) * (n0 + 1) as f64).sqrt());
            }
            // b^dag_Q b_0: nq -> nq + 1
            if n0 > 0 && nq + 1 < dim {
                ao[nq + 1] += f[0][1] * (c * ((n0 as f64) * (nq + 1) as f64).sqrt());
            }
        }
        diagonal += w * ad.iter().map(|x| x.norm_sqr()).sum::<f64>();
        transfer += w * ao.iter().map(|x| x.norm_sqr()).sum::<f64>();
    }
    TwoMode { populations: [pops[0] / z, pops[1] / z], diagonal: diagonal / z, transfer: transfer / z }
}

/// Dense plane-wave Hamiltonian of the separable 3D lattice on a single
/// quasimomentum `q` (units of `pi/a`), eigenvalues ascending.
pub fn dense_3d_bands(depths: [f64; 3], q: [f64; 3], cutoff: i64) -> Vec<f64> {
    let range: Vec<i64> = (-cutoff..=cutoff).collect();
    let mut index = Vec::new();
    for &a in &range {
        for &b in &range {
            for &c in &range {
                index.push([a, b, c]);
            }
        }
    }
    let n = index.len();
    let mut h = DMatrix::<f64>::zeros(n, n);
    for (i, l) in index.iter().enumerate() {
        let mut diag = 0.0;
        for d in 0..3 {
            let p = 2.0 * l[d] as f64 + q[d];
            diag += p * p + depths[d] / 2.0;
        }
        h[(i, i)] = diag;
        for d in 0..3 {
            for step in [-1i64, 1] {
                let mut l2 = *l;
                l2[d] += step;
                if l2[d].abs() > cutoff {
                    continue;
                }
                let j = index.iter().position(|x| *x == l2).unwrap();
                h[(i, j)] = -depths[d] / 4.0;
            }
        }
    }
    let mut e: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().cloned().collect();
    e.sort_by(|a, b| a.partial_cmp(b).unwrap());
    e
}
