//! Common vocabulary for the three many-body phases.

use serde::Serialize;

use crate::error::Result;
use crate::fermi::FermiState;
use crate::lattice::Lattice;
use crate::mott::MottState;
use crate::scalar::{Real, Vec3};
use crate::superfluid::SuperfluidState;

/// Structure-factor components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Component {
    /// Zeroth order: average density plus its thermal fluctuations.
    G0,
    /// First order within the lowest band.
    G1,
    /// Second order (two quasiparticle modes); superfluid only.
    G2,
    /// Interband.
    B,
}

impl Component {
    pub const ALL: [Component; 4] = [Component::G0, Component::G1, Component::G2, Component::B];

    pub fn label(self) -> &'static str {
        match self {
            Component::G0 => "S_g0",
            Component::G1 => "S_g1",
            Component::G2 => "S_g2",
            Component::B => "S_b",
        }
    }
}

/// Which components to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Selection {
    pub g0: bool,
    pub g1: bool,
    pub g2: bool,
    pub b: bool,
}

impl Selection {
    pub const ALL: Selection = Selection { g0: true, g1: true, g2: true, b: true };

    pub fn only(components: &[Component]) -> Self {
        let mut s = Selection::default();
        for c in components {
            match c {
                Component::G0 => s.g0 = true,
                Component::G1 => s.g1 = true,
                Component::G2 => s.g2 = true,
                Component::B => s.b = true,
            }
        }
        s
    }

    pub fn contains(&self, c: Component) -> bool {
        match c {
            Component::G0 => self.g0,
            Component::G1 => self.g1,
            Component::G2 => self.g2,
            Component::B => self.b,
        }
    }
}

/// Per-k structure-factor components. Unevaluated components are zero.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StructureFactorBreakdown<T> {
    pub s_g0: T,
    pub s_g1: T,
    pub s_g2: T,
    pub s_b: T,
    /// Upper bound on weight dropped by the matrix-element sparsity threshold.
    pub truncation: T,
}

impl<T: Real> StructureFactorBreakdown<T> {
    pub fn zero() -> Self {
        StructureFactorBreakdown { s_g0: T::zero(), s_g1: T::zero(), s_g2: T::zero(), s_b: T::zero(), truncation: T::zero() }
    }

    pub fn get(&self, c: Component) -> T {
        match c {
            Component::G0 => self.s_g0,
            Component::G1 => self.s_g1,
            Component::G2 => self.s_g2,
            Component::B => self.s_b,
        }
    }

    pub fn total(&self) -> T {
        self.s_g0 + self.s_g1 + self.s_g2 + self.s_b
    }

    pub fn scaled(&self, s: T) -> Self {
        StructureFactorBreakdown {
            s_g0: self.s_g0 * s,
            s_g1: self.s_g1 * s,
            s_g2: self.s_g2 * s,
            s_b: self.s_b * s,
            truncation: self.truncation * s,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        StructureFactorBreakdown {
            s_g0: self.s_g0 + o.s_g0,
            s_g1: self.s_g1 + o.s_g1,
            s_g2: self.s_g2 + o.s_g2,
            s_b: self.s_b + o.s_b,
            truncation: self.truncation + o.truncation,
        }
    }

    /// Sum of the components that leave the gas excited.
    pub fn inelastic(&self, kind: PhaseKind) -> T {
        Component::ALL.iter().filter(|c| kind.is_inelastic(**c)).map(|c| self.get(*c)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseKind {
    Fermi,
    Superfluid,
    Mott,
}

impl PhaseKind {
    pub fn components(self) -> &'static [Component] {
        match self {
            PhaseKind::Superfluid => &Component::ALL,
            PhaseKind::Fermi | PhaseKind::Mott => &[Component::G0, Component::G1, Component::B],
        }
    }

    /// Heating classification. The thermal-fluctuation part of `S_g0` transfers
    /// no energy and is elastic; the Mott `S_g1` term is diagonal in the number
    /// basis and therefore elastic as well.
    pub fn is_inelastic(self, c: Component) -> bool {
        match (self, c) {
            (_, Component::G0) => false,
            (_, Component::B) => true,
            (PhaseKind::Mott, _) => false,
            (PhaseKind::Fermi, Component::G2) => false,
            _ => true,
        }
    }

    pub fn elastic_components(self) -> Vec<Component> {
        self.components().iter().copied().filter(|c| !self.is_inelastic(*c)).collect()
    }

    pub fn inelastic_components(self) -> Vec<Component> {
        self.components().iter().copied().filter(|c| self.is_inelastic(*c)).collect()
    }
}

/// A solved many-body state at temperature `T`.
#[derive(Debug, Clone)]
pub enum PhaseState<T> {
    Fermi(FermiState<T>),
    Superfluid(SuperfluidState<T>),
    Mott(MottState<T>),
}

impl<T: Real> PhaseState<T> {
    pub fn kind(&self) -> PhaseKind {
        match self {
            PhaseState::Fermi(_) => PhaseKind::Fermi,
            PhaseState::Superfluid(_) => PhaseKind::Superfluid,
            PhaseState::Mott(_) => PhaseKind::Mott,
        }
    }

    pub fn lattice(&self) -> &Lattice<T> {
        match self {
            PhaseState::Fermi(s) => &s.lattice,
            PhaseState::Superfluid(s) => &s.lattice,
            PhaseState::Mott(s) => &s.lattice,
        }
    }

    pub fn atoms(&self) -> T {
        match self {
            PhaseState::Fermi(s) => s.atoms,
            PhaseState::Superfluid(s) => s.atoms,
            PhaseState::Mott(s) => s.atoms(),
        }
    }

    pub fn temperature(&self) -> T {
        match self {
            PhaseState::Fermi(s) => s.temperature,
            PhaseState::Superfluid(s) => s.temperature,
            PhaseState::Mott(s) => s.temperature,
        }
    }

    /// Structure factor at momentum transfer `k` (units of `pi/a`).
    pub fn evaluate(&self, k: Vec3<T>, sel: Selection) -> Result<StructureFactorBreakdown<T>> {
        match self {
            PhaseState::Fermi(s) => s.evaluate(k, sel),
            PhaseState::Superfluid(s) => s.evaluate(k, sel),
            PhaseState::Mott(s) => Ok(s.evaluate(k, sel)),
        }
    }

    /// Temperature indicator: Fermi-sea fraction, condensate fraction, or
    /// ground-state proportion.
    pub fn population_indicator(&self) -> T {
        match self {
            PhaseState::Fermi(s) => s.fermi_sea_fraction(),
            PhaseState::Superfluid(s) => s.condensate / s.atoms,
            PhaseState::Mott(s) => s.ground_state_proportion(),
        }
    }
}
