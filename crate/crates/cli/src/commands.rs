//! Subcommand implementations.

use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use lattice_light::angular::{angular_map, detector_integrate, total_inelastic_rate, uniform_rate, Optics, RateIntegral};
use lattice_light::bands::{hubbard_j, hubbard_u, interaction_scale, wannier_from_bloch};
use lattice_light::fermi::{fermi_temperature, FermiState};
use lattice_light::lattice::Lattice;
use lattice_light::mott::MottState;
use lattice_light::phase::{Component, PhaseState};
use lattice_light::superfluid::{SuperfluidOptions, SuperfluidState};
use lattice_light::system::{recoil_energy, LatticeSpec, SpeciesSpec};
use lattice_light::thermometry::{temperature_curve, ThermometryRun};

use crate::config::{PhaseName, RunConfig, TemperatureUnit};
use crate::error::CliError;
use crate::output::{format_number, numbers, optional, Sink};

/// Resolved physical setup shared by the subcommands.
pub struct Context {
    pub cfg: RunConfig,
    pub species: SpeciesSpec<f64>,
    pub spec: LatticeSpec<f64>,
    pub lattice: Arc<Lattice<f64>>,
    pub optics: Optics<f64>,
}

impl Context {
    pub fn new(cfg: RunConfig) -> Result<Self, CliError> {
        let species = cfg.species_spec()?;
        let spec = cfg.lattice_spec(&species)?;
        let lattice = Arc::new(Lattice::build(&spec)?.with_threshold(cfg.lattice.sparsity));
        let optics = Optics::new(&spec, &species);
        Ok(Context { cfg, species, spec, lattice, optics })
    }

    fn sites(&self) -> f64 {
        self.lattice.site_count() as f64
    }

    fn atoms(&self, kind: PhaseName) -> Result<f64, CliError> {
        let p = &self.cfg.phase;
        match kind {
            PhaseName::Mott => Ok(p.mott_filling as f64 * self.sites()),
            _ => match (p.atoms, p.filling) {
                (Some(n), _) => Ok(n),
                (None, Some(f)) => Ok(f * self.sites()),
                (None, None) if kind == PhaseName::Superfluid => Ok(self.sites()),
                _ => Err(CliError::Config("fermions need phase.atoms or phase.filling".into())),
            },
        }
    }

    fn fermi_temperature(&self) -> Result<f64, CliError> {
        Ok(fermi_temperature(&self.lattice, self.atoms(PhaseName::Fermi)?)?)
    }

    fn temperature(&self, kind: PhaseName) -> Result<f64, CliError> {
        let p = &self.cfg.phase;
        match (p.temperature, p.temperature_over_tf) {
            (Some(t), _) => Ok(t),
            (None, Some(r)) if kind == PhaseName::Fermi => Ok(r * self.fermi_temperature()?),
            (None, Some(_)) => Err(CliError::Config("phase.temperature_over_tf applies to fermions only".into())),
            (None, None) => Err(CliError::Config("phase.temperature is required".into())),
        }
    }

    fn onsite(&self) -> f64 {
        self.cfg.phase.onsite.unwrap_or_else(|| {
            let w = &self.lattice.wanniers;
            hubbard_u([&w[0], &w[1], &w[2]], &self.spec, &self.species)
        })
    }

    fn superfluid_options(&self) -> SuperfluidOptions<f64> {
        let p = &self.cfg.phase;
        SuperfluidOptions { max_depletion: p.max_depletion, max_iterations: p.max_iterations, tolerance: p.tolerance }
    }

    pub fn build(&self, kind: PhaseName, t: f64) -> Result<PhaseState<f64>, CliError> {
        Ok(self.solve(kind, t, self.atoms(kind)?)?)
    }

    fn solve(&self, kind: PhaseName, t: f64, atoms: f64) -> lattice_light::Result<PhaseState<f64>> {
        let lat = self.lattice.clone();
        Ok(match kind {
            PhaseName::Fermi => PhaseState::Fermi(FermiState::solve(lat, t, atoms)?),
            PhaseName::Superfluid => {
                let scale = interaction_scale(&self.spec, &self.species);
                PhaseState::Superfluid(SuperfluidState::solve(lat, scale, t, atoms, self.superfluid_options())?)
            }
            PhaseName::Mott => PhaseState::Mott(MottState::new(lat, self.cfg.phase.mott_filling, t, self.onsite())?),
        })
    }

    fn phase_kind(&self) -> Result<PhaseName, CliError> {
        self.cfg.phase.kind.ok_or_else(|| CliError::Config("phase.kind is required (fermi, superfluid or mott)".into()))
    }
}

/// Fields merged into the one-line summary printed on success.
pub type Summary = serde_json::Map<String, Value>;

fn summary(pairs: Value) -> Summary {
    match pairs {
        Value::Object(m) => m,
        _ => Summary::new(),
    }
}

pub fn bands(ctx: &Context, sink: &mut Sink) -> Result<Summary, CliError> {
    let listed = ctx.cfg.bands.listed;
    let mut band_rows = Vec::new();
    let mut wannier_rows = Vec::new();
    let mut dims = Vec::new();
    for (d, sol) in ctx.lattice.bands.dims.iter().enumerate() {
        let shown = listed.min(sol.n_bands());
        for m in 0..shown {
            let mut order: Vec<usize> = (0..sol.sites).collect();
            order.sort_by(|a, b| sol.q[*a].total_cmp(&sol.q[*b]));
            for iq in order {
                band_rows.push(vec![d.to_string(), format_number(sol.q[iq]), m.to_string(), format_number(sol.energies[m][iq])]);
            }
            let w = wannier_from_bloch(sol, m)?;
            for (x, v) in w.x.iter().zip(&w.values) {
                wannier_rows.push(vec![d.to_string(), format_number(*x), m.to_string(), format_number(*v)]);
            }
        }
        let lowest = |m: usize| sol.energies[m].iter().copied().fold(f64::INFINITY, f64::min);
        let highest = |m: usize| sol.energies[m].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        dims.push(json!({
            "depth": sol.depth,
            "sites": sol.sites,
            "tunneling": hubbard_j(sol),
            "bandwidth": sol.lowest_bandwidth(),
            "gap": if sol.n_bands() > 1 { lowest(1) - highest(0) } else { f64::NAN },
        }));
    }
    let u = ctx.onsite();
    let result = json!({
        "spacing_m": ctx.spec.spacing,
        "recoil_energy_j": recoil_energy(&ctx.spec, &ctx.species),
        "dimensions": dims,
        "onsite": u,
        "interaction_scale": interaction_scale(&ctx.spec, &ctx.species),
    });
    sink.csv("bands.csv", &["dim", "q", "band", "energy"], &band_rows)?;
    sink.csv("wannier.csv", &["dim", "x", "band", "value"], &wannier_rows)?;
    sink.json("bands.json", &result)?;
    Ok(summary(json!({ "tunneling_x": hubbard_j(&ctx.lattice.bands.dims[0]), "onsite": u })))
}

fn component_columns(kind: PhaseName) -> &'static [Component] {
    match kind {
        PhaseName::Superfluid => &[Component::G0, Component::G1, Component::G2, Component::B],
        _ => &[Component::G0, Component::G1, Component::B],
    }
}

fn structure_rows(ctx: &Context, phase: &PhaseState<f64>, kind: PhaseName, with_rate: bool) -> Result<(Vec<&'static str>, Vec<Vec<String>>), CliError> {
    let map = angular_map(phase, &ctx.optics, &ctx.cfg.thetas(), &ctx.cfg.phis())?;
    let cols = component_columns(kind);
    let mut header = vec!["theta", "phi"];
    if with_rate {
        header.extend(["kx", "ky", "kz"]);
    }
    header.extend(cols.iter().map(|c| c.label()));
    header.push("S_total");
    if with_rate {
        header.extend(["prefactor", "rate"]);
    }
    let rows = map
        .nodes
        .iter()
        .map(|n| {
            let mut v = vec![n.theta, n.phi];
            if with_rate {
                v.extend(n.k);
            }
            v.extend(cols.iter().map(|c| n.s.get(*c)));
            v.push(n.s.total());
            if with_rate {
                v.extend([n.prefactor, n.rate()]);
            }
            numbers(&v)
        })
        .collect();
    Ok((header, rows))
}

#[derive(Serialize)]
struct PhaseHeader {
    kind: PhaseName,
    atoms: f64,
    temperature: f64,
    sites: [usize; 3],
}

pub fn phase(ctx: &Context, kind: PhaseName, sink: &mut Sink) -> Result<Summary, CliError> {
    let t = ctx.temperature(kind)?;
    let state = ctx.build(kind, t)?;
    let header = PhaseHeader { kind, atoms: state.atoms(), temperature: t, sites: ctx.spec.sites };
    let (cols, rows) = structure_rows(ctx, &state, kind, false)?;
    let name = kind.label();
    let (result, brief) = match &state {
        PhaseState::Fermi(s) => {
            let tf = ctx.fermi_temperature()?;
            let r = json!({ "state": header, "chemical_potential": s.mu, "fermi_temperature": tf, "fermi_sea_fraction": s.fermi_sea_fraction() });
            (r, json!({ "fermi_temperature": tf, "fermi_sea_fraction": s.fermi_sea_fraction() }))
        }
        PhaseState::Superfluid(s) => {
            let quasimomenta: Vec<[f64; 3]> = (0..ctx.lattice.site_count())
                .map(|i| {
                    let q = ctx.lattice.unflat(i);
                    std::array::from_fn(|d| ctx.lattice.bands.dims[d].q[q[d]])
                })
                .collect();
            let r = json!({
                "state": header,
                "condensate": s.condensate,
                "depletion": s.depletion,
                "iterations": s.iterations,
                "number_residual": s.number_residual(),
                "particle_like_ratio": s.particle_like_ratio(),
                "interaction": s.interaction,
                "spectrum": { "q": quasimomenta, "omega": s.quasi.omega, "u": s.quasi.u, "v": s.quasi.v, "occupation": s.quasi.n },
            });
            (r, json!({ "condensate": s.condensate, "depletion": s.depletion }))
        }
        PhaseState::Mott(s) => {
            let e = &s.ensemble;
            let r = json!({
                "state": header,
                "onsite": e.onsite,
                "ground_state_proportion": s.ground_state_proportion(),
                "mean_pairs": e.mean_pairs(),
                "number_variance": e.number_variance(),
                "pair_cutoff": e.v_max,
                "tail_bound": e.tail_bound,
            });
            (r, json!({ "ground_state_proportion": s.ground_state_proportion(), "tail_bound": e.tail_bound }))
        }
    };
    sink.csv(&format!("{name}.csv"), &cols, &rows)?;
    sink.json(&format!("{name}.json"), &result)?;
    Ok(summary(brief))
}

pub fn map(ctx: &Context, sink: &mut Sink) -> Result<Summary, CliError> {
    let kind = ctx.phase_kind()?;
    let t = ctx.temperature(kind)?;
    let state = ctx.build(kind, t)?;
    let (cols, rows) = structure_rows(ctx, &state, kind, true)?;
    sink.csv("map.csv", &cols, &rows)?;
    Ok(summary(json!({ "phase": kind, "temperature": t, "directions": rows.len() })))
}

fn integral_json(r: &RateIntegral<f64>, components: &[Component]) -> Value {
    let per: serde_json::Map<String, Value> = components.iter().map(|c| (c.label().to_string(), json!(r.rates.get(*c)))).collect();
    let err: serde_json::Map<String, Value> = components.iter().map(|c| (c.label().to_string(), json!(r.error.get(*c)))).collect();
    let total: f64 = components.iter().map(|c| r.rates.get(*c)).sum();
    let total_err: f64 = components.iter().map(|c| r.error.get(*c)).sum();
    json!({ "total": total, "components": per, "quadrature_error": err, "total_quadrature_error": total_err, "evaluations": r.evaluations })
}

pub fn collect(ctx: &Context, sink: &mut Sink) -> Result<Summary, CliError> {
    let kind = ctx.phase_kind()?;
    let t = ctx.temperature(kind)?;
    let state = ctx.build(kind, t)?;
    let det = ctx.cfg.detector()?;
    let quad = ctx.cfg.quadrature_spec();
    let all = state.kind().components();
    let detected = detector_integrate(&state, &ctx.optics, &det, all, &quad)?;
    let heating = total_inelastic_rate(&state, &ctx.optics, &quad)?;
    let result = json!({
        "phase": kind,
        "temperature": t,
        "atoms": state.atoms(),
        "detector": det,
        "units": "photons per second",
        "collected": integral_json(&detected, all),
        "inelastic_all_angles": integral_json(&heating, &state.kind().inelastic_components()),
        "uniform_collected_per_unit_s": uniform_rate(&ctx.optics, det.theta_stop, det.theta_max),
    });
    sink.json("collect.json", &result)?;
    Ok(summary(json!({ "collected": detected.sum(all), "inelastic": heating.sum(&state.kind().inelastic_components()) })))
}

pub fn thermometry(ctx: &Context, sink: &mut Sink) -> Result<Summary, CliError> {
    let kind = ctx.phase_kind()?;
    let th = &ctx.cfg.thermometry;
    if th.temperatures.is_empty() {
        return Err(CliError::Config("thermometry.temperatures is empty".into()));
    }
    let dt = th.delta_t.ok_or_else(|| CliError::Config("thermometry.delta_t is required".into()))?;
    let unit = match th.unit {
        TemperatureUnit::Recoil => 1.0,
        TemperatureUnit::Fermi if kind == PhaseName::Fermi => ctx.fermi_temperature()?,
        TemperatureUnit::Fermi => return Err(CliError::Config("thermometry.unit = \"fermi\" applies to fermions only".into())),
    };
    let run = ThermometryRun {
        detector: ctx.cfg.detector()?,
        heating_fraction: th.heating_fraction,
        efficiency: th.efficiency,
        delta_t: dt * unit,
        temperatures: th.temperatures.iter().map(|t| t * unit).collect(),
        exposure: th.exposure,
        quadrature: ctx.cfg.quadrature_spec(),
    };
    let atoms = ctx.atoms(kind)?;
    let build = |t: f64| ctx.solve(kind, t, atoms);
    let rows = temperature_curve(&run, &ctx.optics, &build)?;
    let header = [
        "temperature",
        "temperature_plus",
        "indicator",
        "mode",
        "heating_rate",
        "collected_rate",
        "exposure",
        "collected",
        "collected_plus",
        "repetitions",
        "repetitions_exact",
    ];
    let mut table = Vec::new();
    for r in &rows {
        for m in &r.modes {
            let b = r.budget.as_ref();
            table.push(vec![
                format_number(r.temperature),
                format_number(r.temperature_plus),
                optional(r.indicator),
                m.mode.label().to_string(),
                optional(b.map(|b| b.heating_rate(m.mode))),
                optional(b.map(|b| b.collected_rate(m.mode))),
                optional(m.exposure),
                optional(m.collected),
                optional(m.collected_plus),
                m.repetitions.map(|x| x.to_string()).unwrap_or_default(),
                optional(m.repetitions_exact),
            ]);
        }
    }
    sink.csv("thermometry.csv", &header, &table)?;
    sink.json("thermometry.json", &json!({ "phase": kind, "run": run, "rows": rows }))?;
    if let Some(e) = rows.iter().find_map(|r| r.failure.clone()) {
        return Err(e.into());
    }
    let taus: Vec<Value> = rows.iter().map(|r| json!(r.modes.first().and_then(|m| m.repetitions))).collect();
    Ok(summary(json!({ "repetitions": taus })))
}
