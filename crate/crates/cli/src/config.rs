//! Run configuration: TOML schema, `--set` overrides and resolution into
//! engine types.

use std::path::Path;

use serde::{Deserialize, Serialize};

use lattice_light::angular::{DetectorSpec, QuadratureSpec};
use lattice_light::system::{LatticeSpec, SpeciesSpec, DEFAULT_BANDS, DEFAULT_CUTOFF};
use lattice_light::thermometry::ExposurePolicy;
use lattice_light::units;

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: LatticeConfig,
    pub species: SpeciesConfig,
    #[serde(default)]
    pub phase: PhaseConfig,
    #[serde(default)]
    pub detector: DetectorConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub thermometry: ThermometryConfig,
    #[serde(default)]
    pub bands: BandsConfig,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub sites: [usize; 3],
    /// E_R
    pub depths: [f64; 3],
    /// Lattice spacing in meters; half the transition wavelength when absent.
    pub spacing: Option<f64>,
    #[serde(default = "default_bands")]
    pub n_bands: usize,
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    /// Matrix elements with `|D_d|` below this are dropped from double sums.
    #[serde(default = "default_sparsity")]
    pub sparsity: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesConfig {
    /// `rb87` or `k40`; the fields below override the shipped data.
    pub atom: String,
    pub mass: Option<f64>,
    pub scattering_length: Option<f64>,
    pub gamma: Option<f64>,
    pub wavelength: Option<f64>,
    /// Multiplies the scattering length.
    #[serde(default = "one")]
    pub scattering_scale: f64,
    /// Units of the linewidth.
    #[serde(default = "default_detuning")]
    pub detuning: f64,
    /// W/m^2
    #[serde(default = "default_intensity")]
    pub intensity: f64,
    pub probe_wavelength: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseName {
    Fermi,
    Superfluid,
    Mott,
}

impl PhaseName {
    pub fn label(self) -> &'static str {
        match self {
            PhaseName::Fermi => "fermi",
            PhaseName::Superfluid => "superfluid",
            PhaseName::Mott => "mott",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    pub kind: Option<PhaseName>,
    pub atoms: Option<f64>,
    /// `N / M`, used when `atoms` is absent.
    pub filling: Option<f64>,
    /// E_R / k_B
    pub temperature: Option<f64>,
    /// Temperature in units of the Fermi temperature (fermions only).
    pub temperature_over_tf: Option<f64>,
    #[serde(default = "default_depletion")]
    pub max_depletion: f64,
    #[serde(default = "default_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_sf_tolerance")]
    pub tolerance: f64,
    /// Atoms per site in the Mott state.
    #[serde(default = "default_mott_filling")]
    pub mott_filling: u32,
    /// On-site energy in E_R; computed from the Wannier functions when absent.
    pub onsite: Option<f64>,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        PhaseConfig {
            kind: None,
            atoms: None,
            filling: None,
            temperature: None,
            temperature_over_tf: None,
            max_depletion: default_depletion(),
            max_iterations: default_iterations(),
            tolerance: default_sf_tolerance(),
            mott_filling: default_mott_filling(),
            onsite: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    /// Radians.
    #[serde(default = "default_stop")]
    pub theta_stop: f64,
    #[serde(default = "default_aperture")]
    pub numerical_aperture: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig { theta_stop: default_stop(), numerical_aperture: default_aperture() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub theta_min: f64,
    #[serde(default = "pi")]
    pub theta_max: f64,
    #[serde(default = "default_theta_points")]
    pub theta_points: usize,
    #[serde(default)]
    pub phis: Vec<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { theta_min: 0.0, theta_max: pi(), theta_points: default_theta_points(), phis: Vec::new() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_theta_order")]
    pub theta_order: usize,
    #[serde(default = "default_theta_panels")]
    pub theta_panels: usize,
    #[serde(default = "default_max_theta_panels")]
    pub max_theta_panels: usize,
    #[serde(default = "default_min_phi")]
    pub min_phi_points: usize,
    #[serde(default = "default_max_phi")]
    pub max_phi_points: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: default_rel_tol(),
            theta_order: default_theta_order(),
            theta_panels: default_theta_panels(),
            max_theta_panels: default_max_theta_panels(),
            min_phi_points: default_min_phi(),
            max_phi_points: default_max_phi(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TemperatureUnit {
    /// E_R / k_B
    Recoil,
    /// Multiples of the Fermi temperature.
    Fermi,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermometryConfig {
    #[serde(default)]
    pub temperatures: Vec<f64>,
    pub delta_t: Option<f64>,
    #[serde(default = "default_unit")]
    pub unit: TemperatureUnit,
    /// `W = heating_fraction * N`.
    #[serde(default = "default_heating")]
    pub heating_fraction: f64,
    #[serde(default = "one")]
    pub efficiency: f64,
    #[serde(default = "default_exposure")]
    pub exposure: ExposurePolicy,
}

impl Default for ThermometryConfig {
    fn default() -> Self {
        ThermometryConfig {
            temperatures: Vec::new(),
            delta_t: None,
            unit: default_unit(),
            heating_fraction: default_heating(),
            efficiency: 1.0,
            exposure: default_exposure(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandsConfig {
    /// Number of bands written per dimension.
    #[serde(default = "default_listed")]
    pub listed: usize,
}

impl Default for BandsConfig {
    fn default() -> Self {
        BandsConfig { listed: default_listed() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub threads: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { threads: 0 }
    }
}

fn default_bands() -> usize {
    DEFAULT_BANDS
}
fn default_cutoff() -> usize {
    DEFAULT_CUTOFF
}
fn default_sparsity() -> f64 {
    lattice_light::matrix_elements::DEFAULT_SPARSITY_THRESHOLD
}
fn one() -> f64 {
    1.0
}
fn pi() -> f64 {
    std::f64::consts::PI
}
fn default_detuning() -> f64 {
    20.0
}
fn default_intensity() -> f64 {
    5.0
}
fn default_depletion() -> f64 {
    lattice_light::superfluid::DEFAULT_MAX_DEPLETION
}
fn default_iterations() -> usize {
    500
}
fn default_sf_tolerance() -> f64 {
    1e-6
}
fn default_mott_filling() -> u32 {
    1
}
fn default_stop() -> f64 {
    0.06
}
fn default_aperture() -> f64 {
    0.5
}
fn default_theta_points() -> usize {
    181
}
fn default_rel_tol() -> f64 {
    1e-4
}
fn default_theta_order() -> usize {
    8
}
fn default_theta_panels() -> usize {
    4
}
fn default_max_theta_panels() -> usize {
    256
}
fn default_min_phi() -> usize {
    16
}
fn default_max_phi() -> usize {
    4096
}
fn default_unit() -> TemperatureUnit {
    TemperatureUnit::Recoil
}
fn default_heating() -> f64 {
    0.1
}
fn default_exposure() -> ExposurePolicy {
    ExposurePolicy::Fixed
}
fn default_listed() -> usize {
    3
}

/// Reads the file, applies `key.path=value` overrides and validates the schema.
pub fn load(path: &Path, overrides: &[String]) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut doc: toml::Table = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let cfg: RunConfig = toml::Value::Table(doc).try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn apply_override(doc: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| CliError::Config(format!("override `{spec}` is not key=value")))?;
    let value = parse_value(raw.trim());
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("bad override key `{key}`")));
    }
    let mut table = doc;
    for part in &path[..path.len() - 1] {
        let entry = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry.as_table_mut().ok_or_else(|| CliError::Config(format!("`{part}` in `{key}` is not a section")))?;
    }
    table.insert(path[path.len() - 1].to_string(), value);
    Ok(())
}

/// TOML literal if it parses as one, otherwise a bare string.
fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if units::preset(&self.species.atom).is_none() {
            return bad(&format!("unknown atom `{}` (expected rb87 or k40)", self.species.atom));
        }
        if !(self.species.scattering_scale >= 0.0) {
            return bad("species.scattering_scale must be non-negative");
        }
        if !(self.lattice.sparsity >= 0.0 && self.lattice.sparsity < 1.0) {
            return bad("lattice.sparsity must lie in [0, 1)");
        }
        let p = &self.phase;
        if p.atoms.is_some() && p.filling.is_some() {
            return bad("give phase.atoms or phase.filling, not both");
        }
        if p.temperature.is_some() && p.temperature_over_tf.is_some() {
            return bad("give phase.temperature or phase.temperature_over_tf, not both");
        }
        if let Some(t) = p.temperature {
            if !(t >= 0.0) {
                return bad("phase.temperature must be non-negative");
            }
        }
        if self.grid.theta_points == 0 {
            return bad("grid.theta_points must be positive");
        }
        if !(self.quadrature.rel_tol > 0.0) {
            return bad("quadrature.rel_tol must be positive");
        }
        Ok(())
    }

    pub fn lattice_spec(&self, species: &SpeciesSpec<f64>) -> Result<LatticeSpec<f64>, CliError> {
        let l = &self.lattice;
        let spacing = l.spacing.unwrap_or_else(|| species.default_spacing());
        Ok(LatticeSpec::new(l.sites, l.depths, spacing)?.with_bands(l.n_bands, l.cutoff)?)
    }

    pub fn species_spec(&self) -> Result<SpeciesSpec<f64>, CliError> {
        let s = &self.species;
        let data = units::preset(&s.atom).expect("validated");
        let mut spec = SpeciesSpec::from_data(&data, s.detuning, s.intensity)?;
        spec.mass = s.mass.unwrap_or(spec.mass);
        spec.scattering_length = s.scattering_length.unwrap_or(spec.scattering_length) * s.scattering_scale;
        spec.gamma = s.gamma.unwrap_or(spec.gamma);
        spec.wavelength = s.wavelength.unwrap_or(spec.wavelength);
        spec.probe_wavelength = s.probe_wavelength;
        spec.validate()?;
        Ok(spec)
    }

    pub fn detector(&self) -> Result<DetectorSpec<f64>, CliError> {
        Ok(DetectorSpec::from_aperture(self.detector.theta_stop, self.detector.numerical_aperture)?)
    }

    pub fn quadrature_spec(&self) -> QuadratureSpec<f64> {
        let q = &self.quadrature;
        QuadratureSpec {
            rel_tol: q.rel_tol,
            theta_order: q.theta_order,
            theta_panels: q.theta_panels,
            max_theta_panels: q.max_theta_panels,
            min_phi_points: q.min_phi_points,
            max_phi_points: q.max_phi_points,
        }
    }

    pub fn thetas(&self) -> Vec<f64> {
        lattice_light::angular::linspace(self.grid.theta_min, self.grid.theta_max, self.grid.theta_points)
    }

    pub fn phis(&self) -> Vec<f64> {
        if self.grid.phis.is_empty() {
            vec![0.0, std::f64::consts::FRAC_PI_4]
        } else {
            self.grid.phis.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[lattice]\nsites = [4, 4, 1]\ndepths = [8.0, 8.0, 15.0]\n[species]\natom = \"k40\"\n";

    fn parse(text: &str, overrides: &[&str]) -> Result<RunConfig, CliError> {
        let mut doc: toml::Table = toml::from_str(text).unwrap();
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: RunConfig = toml::Value::Table(doc).try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    #[test]
    fn defaults_fill_optional_sections() {
        let cfg = parse(MINIMAL, &[]).unwrap();
        assert_eq!(cfg.detector.theta_stop, 0.06);
        assert_eq!(cfg.quadrature.rel_tol, 1e-4);
        assert_eq!(cfg.lattice.n_bands, DEFAULT_BANDS);
        assert_eq!(cfg.thermometry.exposure, ExposurePolicy::Fixed);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse(&format!("{MINIMAL}[detector]\ntheta_stopp = 0.1\n"), &[]).unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
        assert!(parse(MINIMAL, &["lattice.colour=3"]).is_err());
    }

    #[test]
    fn overrides_replace_and_create_values() {
        let cfg = parse(MINIMAL, &["lattice.depths=[3.0, 3.0, 20.0]", "phase.kind=mott", "phase.temperature=0.02"]).unwrap();
        assert_eq!(cfg.lattice.depths, [3.0, 3.0, 20.0]);
        assert_eq!(cfg.phase.kind, Some(PhaseName::Mott));
        assert_eq!(cfg.phase.temperature, Some(0.02));
        assert!(parse(MINIMAL, &["lattice"]).is_err());
        assert!(parse(MINIMAL, &["lattice.sites.x=3"]).is_err());
    }

    #[test]
    fn species_overrides_and_scaling() {
        let cfg = parse(&MINIMAL.replace("k40", "rb87"), &["species.scattering_scale=0.5", "species.detuning=-10"]).unwrap();
        let s = cfg.species_spec().unwrap();
        assert!((s.scattering_length - 0.5 * units::RB87_D2.scattering_length).abs() < 1e-20);
        assert_eq!(s.detuning, -10.0);
        assert!(parse(&MINIMAL.replace("k40", "cs133"), &[]).is_err());
    }

    #[test]
    fn conflicting_population_fields_are_rejected() {
        assert!(parse(MINIMAL, &["phase.atoms=8", "phase.filling=0.5"]).is_err());
        assert!(parse(MINIMAL, &["phase.temperature=-1"]).is_err());
    }
}
