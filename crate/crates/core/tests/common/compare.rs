//! Code-versus-oracle comparisons returning error measures, shared by the
//! oracle tests and the acceptance run.

use num_complex::Complex64;

use lattice_light::fermi::FermiState;
use lattice_light::matrix_elements::f00;
use lattice_light::mott::MottState;
use lattice_light::phase::Selection;
use lattice_light::superfluid::{interaction_uq, SuperfluidOptions, SuperfluidState};

use super::*;

pub fn transfer(theta: f64, phi: f64) -> [f64; 3] {
    [-theta.sin() * phi.cos(), -theta.sin() * phi.sin(), 1.0 - theta.cos()]
}

pub const ANGLES: [(f64, f64); 4] = [(0.05, 0.0), (0.4, 0.3), (1.1, 0.9), (2.6, 2.0)];

pub fn site_positions(sites: [usize; 3]) -> Vec<[f64; 3]> {
    let mut out = Vec::new();
    for x in 0..sites[0] {
        for y in 0..sites[1] {
            for z in 0..sites[2] {
                out.push([x as f64, y as f64, z as f64]);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FermionErrors {
    /// `|<N>_Fock - N| / N`
    pub number: f64,
    /// worst relative error of `S_g0 + S_g1` against the Fock enumeration
    pub lowest_band: f64,
    /// worst `|S_b - Parseval| / N`
    pub interband: f64,
}

/// Grand-canonical Fock enumeration of the lowest band on a small lattice.
pub fn fermion_vs_fock(sites: [usize; 3], t: f64, atoms: f64) -> FermionErrors {
    let lat = lattice(sites, [4.0, 5.0, 15.0]);
    let state = FermiState::solve(lat.clone(), t, atoms).unwrap();
    let (n_gc, _) = fermion_fock_gc(&lat.energies, &lowest_band_f(&lat, [0.0; 3]), state.mu, t);
    let mut err = FermionErrors { number: (n_gc - atoms).abs() / atoms, ..Default::default() };
    for &(th, ph) in &ANGLES {
        let k = transfer(th, ph);
        let f = lowest_band_f(&lat, k);
        let (_, sg) = fermion_fock_gc(&lat.energies, &f, state.mu, t);
        let s = state.evaluate(k, Selection::ALL).unwrap();
        err.lowest_band = err.lowest_band.max((s.s_g0 + s.s_g1 - sg).abs() / sg.max(1.0));
        // interband channel: Parseval on the box, 1 - sum_p |f_qp|^2 per initial state
        let sb: f64 = (0..lat.site_count())
            .map(|q| state.occupations[q] * (1.0 - f[q].iter().map(|x| x.norm_sqr()).sum::<f64>()))
            .sum();
        err.interband = err.interband.max((s.s_b - sb).abs() / atoms);
    }
    err
}

/// Closed shell with a gap far above `T`, where grand-canonical and
/// canonical ensembles coincide. Worst relative error of `S_g0 + S_g1`.
pub fn fermion_vs_canonical() -> f64 {
    let lat = lattice([3, 2, 1], [4.0, 5.0, 15.0]);
    let mut e = lat.energies.clone();
    e.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let t = (e[1] - e[0]) / 30.0;
    let state = FermiState::solve(lat.clone(), t, 1.0).unwrap();
    let mut worst: f64 = 0.0;
    for &(th, ph) in &ANGLES {
        let k = transfer(th, ph);
        let exact = fermion_fock_canonical(&lat.energies, &lowest_band_f(&lat, k), 1, t);
        let s = state.evaluate(k, Selection::ALL).unwrap();
        worst = worst.max((s.s_g0 + s.s_g1 - exact).abs() / exact);
    }
    worst
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MottErrors {
    pub ground: f64,
    pub total: f64,
    pub first_order: f64,
}

/// Particle-hole ensemble against every number state, worst relative errors.
pub fn mott_vs_enumeration(sites: [usize; 3], u_over_t: f64) -> MottErrors {
    let lat = lattice(sites, [15.0, 15.0, 15.0]);
    let u = 0.42;
    let t = u / u_over_t;
    let state = MottState::new(lat.clone(), 1, t, u).unwrap();
    let pos = site_positions(sites);
    let mut err = MottErrors::default();
    for &(th, ph) in &ANGLES {
        let k = transfer(th, ph);
        let (p0, pattern) = mott_full_enumeration(&pos, 1, u, t, k);
        let dw = f00(&lat, k).powi(2);
        let s = state.evaluate(k, Selection::ALL);
        let full_g1 = dw * pattern - s.s_g0;
        err.ground = err.ground.max((state.ground_state_proportion() - p0).abs() / p0);
        err.total = err.total.max((s.s_g0 + s.s_g1 - dw * pattern).abs() / (dw * pattern));
        err.first_order = err.first_order.max((s.s_g1 - full_g1).abs() / full_g1.abs().max(1e-12));
    }
    err
}

#[derive(Debug, Clone, Copy)]
pub struct BogoliubovErrors {
    pub condensate: f64,
    /// `|N0 - <n_0>|`
    pub n0_err: f64,
    /// relative error of `S_g1` against the exact transfer term
    pub transfer_err: f64,
    /// `|S_g0 + S_g2 - exact| / N^2`
    pub diagonal_err: f64,
    /// relative error of `S_b`
    pub sb_err: f64,
}

/// Two-site lattice, modes `q = 0` and the zone edge, with `N U_Q` fixed at
/// `coupling` times the band gap.
pub fn bogoliubov_vs_two_mode(atoms: usize, coupling: f64, t: f64) -> BogoliubovErrors {
    let lat = lattice([2, 1, 1], [3.0, 20.0, 20.0]);
    let gap = lat.energies[1] - lat.energies[0];
    let unit = interaction_uq(&lat, 1.0);
    let scale = coupling * gap / (atoms as f64 * unit[1]);
    let state = SuperfluidState::solve(lat.clone(), scale, t, atoms as f64, SuperfluidOptions::default()).unwrap();

    let mut u = [[[[Complex64::new(0.0, 0.0); 2]; 2]; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    let mut v = Complex64::new(scale, 0.0);
                    v *= quartic_1d(&lat.bands.dims[0], [a, b, c, d]);
                    v *= quartic_1d(&lat.bands.dims[1], [0; 4]);
                    v *= quartic_1d(&lat.bands.dims[2], [0; 4]);
                    u[a][b][c][d] = v;
                }
            }
        }
    }
    assert!((u[1][0][0][1].re - state.interaction[1]).abs() < 1e-10 * state.interaction[1]);
    assert!((u[0][0][0][0].re - state.interaction[0]).abs() < 1e-10 * state.interaction[0]);

    let mut worst = BogoliubovErrors { condensate: state.condensate, n0_err: 0.0, transfer_err: 0.0, diagonal_err: 0.0, sb_err: 0.0 };
    for &(th, ph) in &ANGLES[1..] {
        let k = transfer(th, ph);
        let fm = lowest_band_f(&lat, k);
        let f = [[fm[0][0], fm[0][1]], [fm[1][0], fm[1][1]]];
        let exact = two_mode(atoms, [lat.energies[0], lat.energies[1]], &u, f, t);
        let s = state.evaluate(k, Selection::ALL).unwrap();
        let n2 = (atoms * atoms) as f64;
        let rows: Vec<f64> = fm.iter().map(|r| r.iter().map(|x| x.norm_sqr()).sum()).collect();
        let sb_exact = exact.populations[0] * (1.0 - rows[0]) + exact.populations[1] * (1.0 - rows[1]);
        worst.n0_err = worst.n0_err.max((state.condensate - exact.populations[0]).abs());
        worst.transfer_err = worst.transfer_err.max((s.s_g1 - exact.transfer).abs() / exact.transfer);
        worst.diagonal_err = worst.diagonal_err.max((s.s_g0 + s.s_g2 - exact.diagonal).abs() / n2);
        worst.sb_err = worst.sb_err.max((s.s_b - sb_exact).abs() / sb_exact);
    }
    worst
}

/// The Bogoliubov comparison at two sizes: every error within `C / N0` and
/// the transfer error shrinking with the condensate.
pub fn bogoliubov_within_inverse_n0(small: &BogoliubovErrors, large: &BogoliubovErrors) -> Result<(), String> {
    for c in [small, large] {
        let inv = 1.0 / c.condensate;
        if c.condensate < 100.0 {
            return Err(format!("N0 = {} below 100", c.condensate));
        }
        if c.n0_err >= 1.0 {
            return Err(format!("condensate differs by {}", c.n0_err));
        }
        if c.transfer_err >= 5.0 * inv || c.diagonal_err >= inv || c.sb_err >= 5.0 * inv {
            return Err(format!("N0 = {:.0}: errors {:.2e} {:.2e} {:.2e} exceed C/N0", c.condensate, c.transfer_err, c.diagonal_err, c.sb_err));
        }
    }
    if large.transfer_err >= 0.5 * small.transfer_err {
        return Err(format!("transfer error does not shrink: {:.2e} -> {:.2e}", small.transfer_err, large.transfer_err));
    }
    Ok(())
}
