//! Physical constants (CODATA 2018) and shipped atomic data.

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Bohr radius, m.
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Tabulated atomic data for a D2 line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomData {
    pub name: &'static str,
    /// kg
    pub mass: f64,
    /// s-wave scattering length, m
    pub scattering_length: f64,
    /// natural linewidth, rad/s
    pub gamma: f64,
    /// vacuum wavelength, m
    pub wavelength: f64,
}

/// ⁸⁷Rb D2 line, |F=2, m_F=2> cycling transition; triplet scattering length.
pub const RB87_D2: AtomData = AtomData {
    name: "rb87",
    mass: 86.909_180_527 * ATOMIC_MASS_UNIT,
    scattering_length: 100.4 * BOHR_RADIUS,
    gamma: 2.0 * std::f64::consts::PI * 6.0666e6,
    wavelength: 780.241_209_686e-9,
};

/// ⁴⁰K D2 line. Spin-polarized fermions do not scatter in the s-wave channel.
pub const K40_D2: AtomData = AtomData {
    name: "k40",
    mass: 39.963_998_48 * ATOMIC_MASS_UNIT,
    scattering_length: 0.0,
    gamma: 2.0 * std::f64::consts::PI * 6.035e6,
    wavelength: 766.700_674_872e-9,
};

pub fn preset(name: &str) -> Option<AtomData> {
    match name.to_ascii_lowercase().as_str() {
        "rb87" | "87rb" => Some(RB87_D2),
        "k40" | "40k" => Some(K40_D2),
        _ => None,
    }
}
