//! Bogoliubov superfluid in the Bloch basis.

use std::sync::Arc;

use log::warn;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fermi::{escaped, sum_rule_floor};
use crate::lattice::{DiagonalTable, Lattice, TransitionTable};
use crate::phase::{Selection, StructureFactorBreakdown};
use crate::scalar::{Real, Vec3};

/// Depletion limit beyond which the quadratic theory is not trusted.
pub const DEFAULT_MAX_DEPLETION: f64 = 0.1;
/// Required `E~ / (N0 U)` for treating higher bands as particle-like.
pub const PARTICLE_LIKE_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SuperfluidOptions<T> {
    pub max_depletion: T,
    pub max_iterations: usize,
    /// Relative tolerance on `N0` (in units of `N`).
    pub tolerance: T,
}

impl<T: Real> Default for SuperfluidOptions<T> {
    fn default() -> Self {
        SuperfluidOptions { max_depletion: T::lit(DEFAULT_MAX_DEPLETION), max_iterations: 500, tolerance: T::lit(1e-6) }
    }
}

/// Quasiparticle data for every lowest-band `q`, flattened. The `q = 0`
/// entry is a placeholder (`u = 1`, `v = 0`, `omega = 0`, `n = 0`).
#[derive(Debug, Clone, Serialize)]
pub struct Quasiparticles<T> {
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub omega: Vec<T>,
    pub n: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct SuperfluidState<T> {
    pub lattice: Arc<Lattice<T>>,
    pub temperature: T,
    pub atoms: T,
    pub condensate: T,
    /// `U_q = U_{q,0,0,q}` in E_R.
    pub interaction: Vec<T>,
    pub quasi: Quasiparticles<T>,
    pub depletion: T,
    pub iterations: usize,
}

/// `U_q` for every flattened lowest-band `q`. `scale = 8 a_s / (pi a)` is the
/// contact strength in E_R; the box normalization makes `M U_0` the Hubbard `U`
/// of a deep lattice.
pub fn interaction_uq<T: Real>(lattice: &Lattice<T>, scale: T) -> Vec<T> {
    let per_dim: Vec<Vec<T>> = (0..3)
        .map(|d| {
            let pairs = &lattice.pairs[d];
            let g0 = pairs.pair(0, 0);
            (0..pairs.sites)
                .map(|q| pairs.pair(q, q).iter().zip(g0).map(|(a, b)| *a * *b).sum())
                .collect()
        })
        .collect();
    let m = T::of(lattice.site_count());
    (0..lattice.site_count())
        .map(|i| {
            let q = lattice.unflat(i);
            scale * per_dim[0][q[0]] * per_dim[1][q[1]] * per_dim[2][q[2]] / m
        })
        .collect()
}

/// Bose occupation `1 / (exp(w / T) - 1)`; zero at `T = 0`.
pub fn bose_einstein<T: Real>(omega: T, t: T) -> T {
    if t <= T::zero() {
        return T::zero();
    }
    T::one() / (omega / t).exp_m1()
}

/// Bogoliubov coefficients at condensate number `n0`.
pub fn bogoliubov_coeffs<T: Real>(lattice: &Lattice<T>, interaction: &[T], n0: T, t: T) -> Result<Quasiparticles<T>> {
    let len = lattice.site_count();
    let e0 = lattice.ground_energy();
    let mu0 = n0 * interaction[0];
    let mut q = Quasiparticles { u: vec![T::one(); len], v: vec![T::zero(); len], omega: vec![T::zero(); len], n: vec![T::zero(); len] };
    for i in 1..len {
        let c = n0 * interaction[i];
        let et = lattice.energies[i] - e0 - mu0 + T::lit(2.0) * c;
        if !(et > c.abs()) {
            let qv = lattice.unflat(i);
            return Err(Error::DynamicalInstability {
                q: qv,
                e_tilde: et.to_f64_lossy(),
                coupling: c.to_f64_lossy(),
            });
        }
        let w = ((et - c) * (et + c)).sqrt();
        let r = et / w;
        q.u[i] = (T::lit(0.5) * (r + T::one())).sqrt();
        q.v[i] = (T::lit(0.5) * (r - T::one())).max(T::zero()).sqrt();
        q.omega[i] = w;
        q.n[i] = bose_einstein(w, t);
    }
    Ok(q)
}

fn noncondensed<T: Real>(q: &Quasiparticles<T>) -> T {
    (1..q.u.len()).map(|i| q.u[i] * q.u[i] * q.n[i] + q.v[i] * q.v[i] * (q.n[i] + T::one())).sum()
}

const BRACKET_POINTS: usize = 64;

/// Largest root of `map(n0) - n0` on `(0, atoms]`, or `None` without a sign change.
fn bracket_root<T: Real>(map: &dyn Fn(T) -> Result<T>, atoms: T, tol: T) -> Result<Option<T>> {
    let h = |x: T| -> Result<T> { Ok(map(x)? - x) };
    let mut hi = atoms;
    let mut h_hi = h(hi)?;
    if h_hi.abs() < tol {
        return Ok(Some(hi));
    }
    for i in (0..BRACKET_POINTS).rev() {
        let lo = atoms * T::of(i) / T::of(BRACKET_POINTS) + T::epsilon() * atoms;
        let h_lo = h(lo)?;
        if (h_lo > T::zero()) != (h_hi > T::zero()) {
            let (mut a, mut b, mut ha) = (lo, hi, h_lo);
            for _ in 0..200 {
                let mid = T::lit(0.5) * (a + b);
                let hm = h(mid)?;
                if hm.abs() < tol || b - a < tol {
                    return Ok(Some(mid));
                }
                if (hm > T::zero()) == (ha > T::zero()) {
                    a = mid;
                    ha = hm;
                } else {
                    b = mid;
                }
            }
            return Ok(Some(T::lit(0.5) * (a + b)));
        }
        hi = lo;
        h_hi = h_lo;
    }
    Ok(None)
}

impl<T: Real> SuperfluidState<T> {
    /// Self-consistent condensate number for fixed total `atoms`.
    pub fn solve(lattice: Arc<Lattice<T>>, scale: T, temperature: T, atoms: T, opts: SuperfluidOptions<T>) -> Result<Self> {
        if !(atoms > T::zero()) || !(temperature >= T::zero()) {
            return Err(crate::error::invalid("superfluid needs N > 0 and T >= 0"));
        }
        let interaction = interaction_uq(&lattice, scale);
        let map = |n0: T| -> Result<T> {
            let q = bogoliubov_coeffs(&lattice, &interaction, n0, temperature)?;
            Ok(atoms - noncondensed(&q))
        };
        let tol = opts.tolerance * atoms;
        let half = T::lit(0.5);
        let mut n0 = atoms;
        let mut history: Vec<T> = Vec::new();
        let mut iterations = 0;
        let mut residual = T::infinity();
        while iterations < opts.max_iterations {
            iterations += 1;
            let g = map(n0)?;
            residual = (g - n0).abs();
            if residual < tol {
                n0 = g;
                break;
            }
            let mut next = half * n0 + half * g;
            history.push(next);
            if history.len() == 3 {
                let (x0, x1, x2) = (history[0], history[1], history[2]);
                let den = x2 - T::lit(2.0) * x1 + x0;
                if den.abs() > T::epsilon() * atoms {
                    let acc = x2 - (x2 - x1) * (x2 - x1) / den;
                    if acc > T::zero() && acc <= atoms {
                        next = acc;
                    }
                }
                history.clear();
            }
            n0 = next.max(T::epsilon() * atoms);
        }
        if residual >= tol {
            // damped iteration stalled (typically close to the condensation
            // temperature); fall back to bisection on the largest root
            match bracket_root(&map, atoms, tol)? {
                Some(root) => n0 = root,
                None => {
                    return Err(Error::NotConverged {
                        what: "condensate number".into(),
                        iterations,
                        residual: residual.to_f64_lossy(),
                    })
                }
            }
        }
        let quasi = bogoliubov_coeffs(&lattice, &interaction, n0, temperature)?;
        let depletion = (atoms - n0) / atoms;
        if depletion >= opts.max_depletion {
            return Err(Error::DepletionTooLarge {
                depletion: depletion.to_f64_lossy(),
                limit: opts.max_depletion.to_f64_lossy(),
            });
        }
        let state = SuperfluidState { lattice, temperature, atoms, condensate: n0, interaction, quasi, depletion, iterations };
        let ratio = state.particle_like_ratio();
        if ratio < T::lit(PARTICLE_LIKE_RATIO) {
            warn!("higher bands are not clearly particle-like: E~/(N0 U) = {ratio:.3}");
        }
        Ok(state)
    }

    /// Smallest `E~ / (N0 U_0)` over the retained higher bands, using `U_0`
    /// as the interaction scale.
    pub fn particle_like_ratio(&self) -> T {
        let c = self.condensate * self.interaction[0];
        if c <= T::zero() {
            return T::infinity();
        }
        let gap = self
            .lattice
            .bands
            .dims
            .iter()
            .filter(|s| s.n_bands() > 1)
            .map(|s| {
                let e1 = s.energies[1].iter().copied().fold(T::infinity(), T::min);
                e1 - s.energies[0][0]
            })
            .fold(T::infinity(), T::min);
        (gap + c) / c
    }

    /// Mean occupation `N_q`; `N0` at `q = 0`.
    pub fn occupations(&self) -> Vec<T> {
        let q = &self.quasi;
        let mut occ: Vec<T> = (0..q.u.len()).map(|i| q.u[i] * q.u[i] * q.n[i] + q.v[i] * q.v[i] * (q.n[i] + T::one())).collect();
        occ[0] = self.condensate;
        occ
    }

    /// `|N - N0 - sum_q (u^2 n + v^2 (n + 1))|`.
    pub fn number_residual(&self) -> T {
        (self.atoms - self.condensate - noncondensed(&self.quasi)).abs()
    }

    fn fluctuation_factors(&self) -> Vec<T> {
        let q = &self.quasi;
        let mut f: Vec<T> = (0..q.u.len())
            .map(|i| {
                let s = q.u[i] * q.u[i] + q.v[i] * q.v[i];
                s * s * q.n[i] * (q.n[i] + T::one())
            })
            .collect();
        f[0] = T::zero();
        f
    }

    pub fn s_g0(&self, diag: &DiagonalTable<T>, occ: &[T]) -> T {
        let coherent: T = diag.overlap.iter().zip(occ).map(|(o, n)| *o * *n).sum();
        let fl: T = self.fluctuation_factors().iter().enumerate().map(|(i, f)| diag.weight(i) * *f).sum();
        diag.lattice_sq * coherent * coherent + fl
    }

    pub fn s_g1(&self, table: &TransitionTable<T>) -> T {
        let q = &self.quasi;
        let mut sum = T::zero();
        for i in 1..q.u.len() {
            let p = self.lattice.unflat(i);
            let w = table.weight([0, 0, 0], p);
            if w == T::zero() {
                continue;
            }
            let d = q.u[i] - q.v[i];
            sum = sum + w * d * d * (T::lit(2.0) * q.n[i] + T::one());
        }
        self.condensate * sum
    }

    pub fn s_g2(&self, table: &TransitionTable<T>) -> T {
        let q = &self.quasi;
        let len = q.u.len();
        let half = T::lit(0.5);
        let two = T::lit(2.0);
        let u2 = |i: usize| q.u[i] * q.u[i];
        let v2 = |i: usize| q.v[i] * q.v[i];
        let uv = |i: usize| q.u[i] * q.v[i];
        let n = |i: usize| q.n[i];
        let n1 = |i: usize| q.n[i] + T::one();
        // six (a, b) pairs contracted as sum_{q,p} a_q |f_qp|^2 b_p
        let mut a = vec![[T::zero(); 6]; len];
        let mut b = vec![[T::zero(); 6]; len];
        for i in 1..len {
            b[i] = [u2(i) * n1(i), u2(i) * n(i), v2(i) * n1(i), v2(i) * n(i), uv(i) * n1(i), uv(i) * n(i)];
            a[i] = [
                u2(i) * n(i) + half * v2(i) * n1(i),
                half * v2(i) * n(i),
                v2(i) * n(i) + half * u2(i) * n1(i),
                half * u2(i) * n(i),
                two * uv(i) * n(i) + uv(i) * n1(i),
                uv(i) * n(i),
            ];
        }
        let wb = table.apply_batch(&b);
        let mut total = T::zero();
        for (x, y) in a.iter().zip(&wb) {
            for g in 0..6 {
                total = total + x[g] * y[g];
            }
        }
        // remove the q = p part of the particle-conserving term
        let diag = table.diagonal();
        let same: T = (1..len)
            .map(|i| {
                let s = u2(i) + v2(i);
                diag[i] * s * s * n(i) * n1(i)
            })
            .sum();
        (total - same).max(T::zero())
    }

    pub fn s_b(&self, table: &TransitionTable<T>, occ: &[T]) -> Result<T> {
        sum_rule_floor(escaped(table, occ), self.atoms)
    }

    pub fn evaluate(&self, k: Vec3<T>, sel: Selection) -> Result<StructureFactorBreakdown<T>> {
        let occ = self.occupations();
        let mut out = StructureFactorBreakdown::zero();
        if sel.g0 {
            out.s_g0 = self.s_g0(&self.lattice.diagonal(k), &occ);
        }
        if !(sel.g1 || sel.g2 || sel.b) {
            return Ok(out);
        }
        let table = self.lattice.table(k);
        if sel.g1 {
            out.s_g1 = self.s_g1(&table);
        }
        if sel.g2 {
            out.s_g2 = self.s_g2(&table);
        }
        if sel.b {
            out.s_b = self.s_b(&table, &occ)?;
        }
        out.truncation = table.dropped_bound() * self.atoms;
        Ok(out)
    }
}
