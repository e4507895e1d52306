//! Spin-polarized noninteracting fermions in the lowest band.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{DiagonalTable, Lattice, TransitionTable};
use crate::phase::{Selection, StructureFactorBreakdown};
use crate::scalar::{Real, Vec3};

const MU_ITERATIONS: usize = 400;

#[derive(Debug, Clone)]
pub struct FermiState<T> {
    pub lattice: Arc<Lattice<T>>,
    pub temperature: T,
    pub mu: T,
    pub atoms: T,
    /// Occupations in flattened q order.
    pub occupations: Vec<T>,
}

/// Fermi-Dirac occupation, overflow-safe.
pub fn fermi_dirac<T: Real>(e: T, mu: T, t: T) -> T {
    let x = (e - mu) / t;
    if x > T::zero() {
        let y = (-x).exp();
        y / (T::one() + y)
    } else {
        T::one() / (T::one() + x.exp())
    }
}

fn check_filling<T: Real>(lattice: &Lattice<T>, atoms: T) -> Result<()> {
    let states = lattice.site_count();
    if !(atoms >= T::zero()) || atoms > T::of(states) {
        return Err(Error::InfeasibleFilling { atoms: atoms.to_f64_lossy(), states });
    }
    Ok(())
}

/// Indices sorted by energy, ties broken by flattened q index.
fn filling_order<T: Real>(energies: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..energies.len()).collect();
    order.sort_by(|&a, &b| energies[a].partial_cmp(&energies[b]).expect("finite energies").then(a.cmp(&b)));
    order
}

/// Step occupation: lowest states full, the next one fractionally filled.
fn step_occupations<T: Real>(energies: &[T], atoms: T) -> Vec<T> {
    let mut occ = vec![T::zero(); energies.len()];
    let mut left = atoms;
    for i in filling_order(energies) {
        if left <= T::zero() {
            break;
        }
        let n = left.min(T::one());
        occ[i] = n;
        left = left - n;
    }
    occ
}

/// Fermi energy of the `T = 0` filling: the highest occupied level, or the
/// midpoint of the gap to the next level when the shell is closed.
pub fn fermi_energy<T: Real>(lattice: &Lattice<T>, atoms: T) -> Result<T> {
    check_filling(lattice, atoms)?;
    let mut e = lattice.energies.clone();
    e.sort_by(|a, b| a.partial_cmp(b).expect("finite energies"));
    let n = atoms.ceil().to_usize().unwrap_or(0);
    if n == 0 {
        return Ok(e[0]);
    }
    let top = e[n - 1];
    let closed = atoms == atoms.floor();
    if closed && n < e.len() && e[n] - top > T::lit(1e-12) {
        Ok(T::lit(0.5) * (top + e[n]))
    } else {
        Ok(top)
    }
}

/// `T_F = (E_F - E_0) / k_B`.
pub fn fermi_temperature<T: Real>(lattice: &Lattice<T>, atoms: T) -> Result<T> {
    Ok(fermi_energy(lattice, atoms)? - lattice.ground_energy())
}

/// Chemical potential fixing the mean number to `atoms` (bisection).
pub fn solve_mu<T: Real>(lattice: &Lattice<T>, temperature: T, atoms: T) -> Result<T> {
    check_filling(lattice, atoms)?;
    if !(temperature >= T::zero()) {
        return Err(crate::error::invalid("temperature must be nonnegative"));
    }
    if temperature == T::zero() {
        return fermi_energy(lattice, atoms);
    }
    let e = &lattice.energies;
    let count = |mu: T| -> T { e.iter().map(|&x| fermi_dirac(x, mu, temperature)).sum() };
    let emin = e.iter().copied().fold(T::infinity(), T::min);
    let emax = e.iter().copied().fold(T::neg_infinity(), T::max);
    let pad = T::lit(60.0) * temperature + T::one();
    let (mut lo, mut hi) = (emin - pad, emax + pad);
    let tol = T::lit(1e-9) * atoms.max(T::one());
    for _ in 0..MU_ITERATIONS {
        let mid = T::lit(0.5) * (lo + hi);
        let n = count(mid);
        if (n - atoms).abs() < tol {
            return Ok(mid);
        }
        if n < atoms {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::epsilon() * hi.abs().max(T::one()) {
            break;
        }
    }
    let mid = T::lit(0.5) * (lo + hi);
    let residual = (count(mid) - atoms).abs();
    if residual < tol {
        Ok(mid)
    } else {
        Err(Error::NotConverged { what: "chemical potential".into(), iterations: MU_ITERATIONS, residual: residual.to_f64_lossy() })
    }
}

impl<T: Real> FermiState<T> {
    pub fn solve(lattice: Arc<Lattice<T>>, temperature: T, atoms: T) -> Result<Self> {
        let mu = solve_mu(&lattice, temperature, atoms)?;
        let occupations = if temperature == T::zero() {
            step_occupations(&lattice.energies, atoms)
        } else {
            lattice.energies.iter().map(|&e| fermi_dirac(e, mu, temperature)).collect()
        };
        Ok(FermiState { lattice, temperature, mu, atoms, occupations })
    }

    /// Convenience constructor from filling fraction `N / M`.
    pub fn from_filling(lattice: Arc<Lattice<T>>, temperature: T, filling: T) -> Result<Self> {
        let atoms = filling * T::of(lattice.site_count());
        Self::solve(lattice, temperature, atoms)
    }

    pub fn fermi_temperature(&self) -> Result<T> {
        fermi_temperature(&self.lattice, self.atoms)
    }

    /// `N_FS / N`: fraction of atoms in states at or below the `T = 0` Fermi energy.
    pub fn fermi_sea_fraction(&self) -> T {
        let Ok(ef) = fermi_energy(&self.lattice, self.atoms) else { return T::zero() };
        if self.atoms <= T::zero() {
            return T::zero();
        }
        let below: T = self
            .lattice
            .energies
            .iter()
            .zip(&self.occupations)
            .filter(|(e, _)| **e <= ef + T::lit(1e-12))
            .map(|(_, n)| *n)
            .sum();
        below / self.atoms
    }

    pub fn s_g0(&self, diag: &DiagonalTable<T>) -> T {
        let coherent: T = diag.overlap.iter().zip(&self.occupations).map(|(o, n)| *o * *n).sum();
        diag.lattice_sq * coherent * coherent + self.diagonal_fluctuation(diag)
    }

    fn diagonal_fluctuation(&self, diag: &DiagonalTable<T>) -> T {
        self.occupations.iter().enumerate().map(|(i, n)| diag.weight(i) * *n * (T::one() - *n)).sum()
    }

    /// `sum_{q != p} |f_{q,p}|^2 N_q (1 - N_p)`.
    pub fn s_g1(&self, table: &TransitionTable<T>) -> T {
        let holes: Vec<T> = self.occupations.iter().map(|n| T::one() - *n).collect();
        let v = table.bilinear(&self.occupations, &holes) - self.diagonal_fluctuation(&table.diagonal_table());
        v.max(T::zero())
    }

    /// `N - sum_{q,p} |f_{q,p}|^2 N_q`.
    pub fn s_b(&self, table: &TransitionTable<T>) -> Result<T> {
        let v = escaped(table, &self.occupations);
        sum_rule_floor(v, self.atoms)
    }

    pub fn evaluate(&self, k: Vec3<T>, sel: Selection) -> Result<StructureFactorBreakdown<T>> {
        let mut out = StructureFactorBreakdown::zero();
        if sel.g0 {
            out.s_g0 = self.s_g0(&self.lattice.diagonal(k));
        }
        if !(sel.g1 || sel.b) {
            return Ok(out);
        }
        let table = self.lattice.table(k);
        if sel.g1 {
            out.s_g1 = self.s_g1(&table);
        }
        if sel.b {
            out.s_b = self.s_b(&table)?;
        }
        out.truncation = table.dropped_bound() * self.atoms;
        Ok(out)
    }
}

/// `sum_q N_q (1 - sum_p |f_{q,p}|^2)`, which equals `N - sum_{q,p} |f_{q,p}|^2 N_q`
/// without the cancellation against `N`.
pub(crate) fn escaped<T: Real>(table: &TransitionTable<T>, occ: &[T]) -> T {
    table.row_sums().iter().zip(occ).map(|(r, n)| (T::one() - *r) * *n).sum()
}

/// Interband remainders may dip below zero only by rounding; larger negative
/// values mean the band expansion did not saturate the sum rule.
pub(crate) fn sum_rule_floor<T: Real>(v: T, atoms: T) -> Result<T> {
    let tol = T::lit(1e-9) * atoms.max(T::one());
    if v < -tol {
        return Err(Error::SumRule { value: v.to_f64_lossy(), tolerance: tol.to_f64_lossy() });
    }
    Ok(v.max(T::zero()))
}
