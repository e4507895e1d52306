//! Finite-temperature static structure factors and light-scattering
//! thermometry for ultracold atoms in optical lattices.

pub mod angular;
pub mod bands;
pub mod eigen;
pub mod error;
pub mod fermi;
pub mod geometry;
pub mod lattice;
pub mod matrix_elements;
pub mod mott;
pub mod phase;
pub mod quadrature;
pub mod scalar;
pub mod superfluid;
pub mod system;
pub mod thermometry;
pub mod units;

pub use error::{Error, ErrorKind, Result};
pub use scalar::{Real, Vec3};

pub type Lattice64 = lattice::Lattice<f64>;
pub type LatticeSpec64 = system::LatticeSpec<f64>;
pub type SpeciesSpec64 = system::SpeciesSpec<f64>;
pub type Bands3D64 = bands::Bands3D<f64>;
pub type FermiState64 = fermi::FermiState<f64>;
pub type SuperfluidState64 = superfluid::SuperfluidState<f64>;
pub type MottState64 = mott::MottState<f64>;
pub type PhaseState64 = phase::PhaseState<f64>;
pub type Breakdown64 = phase::StructureFactorBreakdown<f64>;
pub type Optics64 = angular::Optics<f64>;
pub type DetectorSpec64 = angular::DetectorSpec<f64>;
pub type ThermometryRun64 = thermometry::ThermometryRun<f64>;
