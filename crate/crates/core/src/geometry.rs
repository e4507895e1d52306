//! Scattering geometry: incident probe along +z, scattered direction (theta, phi).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::{Real, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterGeometry<T> {
    pub theta: T,
    pub phi: T,
}

impl<T: Real> ScatterGeometry<T> {
    pub fn new(theta: T, phi: T) -> Result<Self> {
        if !(theta >= T::zero() && theta <= T::PI()) {
            return Err(invalid(format!("theta = {theta} outside [0, pi]")));
        }
        if !(phi >= T::zero() && phi < T::TAU()) {
            return Err(invalid(format!("phi = {phi} outside [0, 2 pi)")));
        }
        Ok(ScatterGeometry { theta, phi })
    }

    /// Unchecked constructor for quadrature nodes; `phi` may be any real.
    pub(crate) fn raw(theta: T, phi: T) -> Self {
        ScatterGeometry { theta, phi }
    }

    fn direction_offset(&self) -> Vec3<T> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [-(st * cp), -(st * sp), -(ct - T::one())]
    }

    /// Momentum transfer `k_i - k_f` in units of `pi/a` for a probe of
    /// wavenumber `ratio * pi/a`.
    pub fn transfer_lattice_units(&self, ratio: T) -> Vec3<T> {
        let d = self.direction_offset();
        [d[0] * ratio, d[1] * ratio, d[2] * ratio]
    }
}

/// Momentum transfer in rad/m when the probe wavelength equals the lattice
/// wavelength (`|k_i| = pi/a`): `-pi (sin t cos p, sin t sin p, cos t - 1) / a`.
pub fn momentum_transfer<T: Real>(geom: &ScatterGeometry<T>, a: T) -> Vec3<T> {
    let k = geom.transfer_lattice_units(T::one());
    let s = T::PI() / a;
    [k[0] * s, k[1] * s, k[2] * s]
}

pub fn norm<T: Real>(v: &Vec3<T>) -> T {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn special_angles() {
        let a: f64 = 2.0;
        let k = momentum_transfer(&ScatterGeometry::new(0.0, 1.0).unwrap(), a);
        assert!(k.iter().all(|x| x.abs() < 1e-15));
        let k = momentum_transfer(&ScatterGeometry::new(PI, 0.0).unwrap(), a);
        assert!(k[0].abs() < 1e-15 && k[1].abs() < 1e-15);
        assert!((k[2] - 2.0 * PI / a).abs() < 1e-15);
        let k = momentum_transfer(&ScatterGeometry::new(PI / 2.0, 0.0).unwrap(), a);
        assert!((k[0] + PI / a).abs() < 1e-15);
        assert!(k[1].abs() < 1e-15);
        assert!((k[2] - PI / a).abs() < 1e-15);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(ScatterGeometry::new(-0.1, 0.0).is_err());
        assert!(ScatterGeometry::new(0.1, 2.0 * PI).is_err());
    }

    proptest! {
        #[test]
        fn elastic_sphere(theta in 0.0..PI, phi in 0.0..(2.0 * PI), a in 0.1f64..10.0) {
            let k = momentum_transfer(&ScatterGeometry::new(theta, phi).unwrap(), a);
            let expect = 2.0 * PI / a * (theta / 2.0).sin();
            prop_assert!((norm(&k) - expect).abs() < 1e-12 * (1.0 + expect));
        }

        #[test]
        fn forward_is_zero(phi in 0.0..(2.0 * PI)) {
            let k = momentum_transfer(&ScatterGeometry::new(0.0, phi).unwrap(), 1.0);
            prop_assert!(norm(&k) == 0.0);
        }
    }
}
