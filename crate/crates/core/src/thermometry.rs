//! Photon-counting thermometry: exposure from a heating budget, collected
//! photons and the number of repetitions needed to resolve a temperature step.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angular::{detector_integrate, total_inelastic_rate, DetectorSpec, Optics, QuadratureSpec, RateIntegral};
use crate::error::{Error, Result};
use crate::phase::{Component, PhaseKind, PhaseState};
use crate::scalar::Real;

/// Treatment of photons that excite atoms into higher bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InterbandMode {
    /// Interband photons heat the gas and reach the detector.
    Include,
    /// Ideal spectral filter before detection: still heats, never collected.
    Filter,
    /// Interband scattering left out of the model altogether.
    Neglect,
}

impl InterbandMode {
    pub const ALL: [InterbandMode; 3] = [InterbandMode::Include, InterbandMode::Filter, InterbandMode::Neglect];

    pub fn label(self) -> &'static str {
        match self {
            InterbandMode::Include => "include",
            InterbandMode::Filter => "filter",
            InterbandMode::Neglect => "neglect",
        }
    }
}

/// How the exposure entering `N_c(T + dT)` is chosen.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExposurePolicy {
    /// Both temperatures use the heating-limited exposure of the lower one:
    /// the exposure is fixed by the reference temperature before measuring.
    #[default]
    Fixed,
    /// Each temperature uses its own heating-limited exposure.
    PerTemperature,
}

/// Heating and detector rates of one state (photons/s, per component).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhotonBudget<T> {
    pub kind: PhaseKind,
    pub atoms: T,
    pub heating: RateIntegral<T>,
    pub detected: RateIntegral<T>,
}

impl<T: Real> PhotonBudget<T> {
    pub fn measure(phase: &PhaseState<T>, optics: &Optics<T>, det: &DetectorSpec<T>, quad: &QuadratureSpec<T>) -> Result<Self> {
        let kind = phase.kind();
        Ok(PhotonBudget {
            kind,
            atoms: phase.atoms(),
            heating: total_inelastic_rate(phase, optics, quad)?,
            detected: detector_integrate(phase, optics, det, kind.components(), quad)?,
        })
    }

    /// Inelastic events per second.
    pub fn heating_rate(&self, mode: InterbandMode) -> T {
        let all = self.heating.sum(&self.kind.inelastic_components());
        match mode {
            InterbandMode::Neglect => all - self.heating.rates.s_b,
            _ => all,
        }
    }

    /// Photons per second reaching the detector.
    pub fn collected_rate(&self, mode: InterbandMode) -> T {
        let all = self.detected.sum(self.kind.components());
        match mode {
            InterbandMode::Include => all,
            _ => all - self.detected.rates.s_b,
        }
    }

    /// `t_exp = W / R_inelastic`.
    pub fn exposure_time(&self, budget: T, mode: InterbandMode) -> Result<T> {
        exposure_time(budget, self.heating_rate(mode))
    }
}

pub fn exposure_time<T: Real>(budget: T, heating_rate: T) -> Result<T> {
    if !(heating_rate > T::zero()) {
        return Err(Error::UnboundedExposure);
    }
    Ok(budget / heating_rate)
}

/// `tau = ceil(N_c(T) / (N_c(T + dT) - N_c(T))^2)`.
pub fn repetitions<T: Real>(nc: T, nc_plus: T, t: T, t_plus: T) -> Result<u64> {
    let tau = repetition_estimate(nc, nc_plus, t, t_plus)?.ceil();
    Ok(tau.to_u64().unwrap_or(u64::MAX).max(1))
}

/// `N_c(T) / (N_c(T + dT) - N_c(T))^2` before rounding up.
pub fn repetition_estimate<T: Real>(nc: T, nc_plus: T, t: T, t_plus: T) -> Result<T> {
    let d = nc_plus - nc;
    if !(d > T::zero()) {
        return Err(Error::DegenerateSignal { t: t.to_f64_lossy(), t_plus: t_plus.to_f64_lossy() });
    }
    Ok(nc / (d * d))
}

#[derive(Debug, Clone, Serialize)]
pub struct ThermometryRun<T> {
    pub detector: DetectorSpec<T>,
    /// `W = heating_fraction * N`.
    pub heating_fraction: T,
    pub efficiency: T,
    pub delta_t: T,
    pub temperatures: Vec<T>,
    pub exposure: ExposurePolicy,
    pub quadrature: QuadratureSpec<T>,
}

impl<T: Real> ThermometryRun<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.heating_fraction > T::zero()) || !(self.delta_t > T::zero()) || !(self.efficiency > T::zero()) {
            return Err(crate::error::invalid("heating budget, temperature step and efficiency must be positive"));
        }
        if self.temperatures.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(crate::error::invalid("temperature grid must be strictly increasing"));
        }
        Ok(())
    }
}

/// Outcome for one interband treatment at one temperature.
#[derive(Debug, Clone, Serialize)]
pub struct ModeResult<T> {
    pub mode: InterbandMode,
    pub exposure: Option<T>,
    pub collected: Option<T>,
    pub collected_plus: Option<T>,
    pub repetitions: Option<u64>,
    /// Unrounded `N_c / dN_c^2`.
    pub repetitions_exact: Option<T>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThermometryRow<T> {
    pub temperature: T,
    pub temperature_plus: T,
    /// Fermi-sea fraction, condensate fraction or ground-state proportion.
    pub indicator: Option<T>,
    pub budget: Option<PhotonBudget<T>>,
    pub budget_plus: Option<PhotonBudget<T>>,
    pub modes: Vec<ModeResult<T>>,
    pub error: Option<String>,
    #[serde(skip)]
    pub failure: Option<Error>,
}

fn mode_result<T: Real>(run: &ThermometryRun<T>, lo: &PhotonBudget<T>, hi: &PhotonBudget<T>, t: T, mode: InterbandMode) -> ModeResult<T> {
    let w = run.heating_fraction * lo.atoms;
    let mut r = ModeResult { mode, exposure: None, collected: None, collected_plus: None, repetitions: None, repetitions_exact: None, error: None };
    let attempt = || -> Result<(T, T, T, T)> {
        let t_lo = lo.exposure_time(w, mode)?;
        let t_hi = match run.exposure {
            ExposurePolicy::PerTemperature => hi.exposure_time(w, mode)?,
            ExposurePolicy::Fixed => t_lo,
        };
        let n_lo = t_lo * lo.collected_rate(mode) * run.efficiency;
        let n_hi = t_hi * hi.collected_rate(mode) * run.efficiency;
        let tau = repetition_estimate(n_lo, n_hi, t, t + run.delta_t)?;
        Ok((t_lo, n_lo, n_hi, tau))
    };
    match attempt() {
        Ok((e, a, b, tau)) => {
            r.exposure = Some(e);
            r.collected = Some(a);
            r.collected_plus = Some(b);
            r.repetitions = Some(tau.ceil().to_u64().unwrap_or(u64::MAX).max(1));
            r.repetitions_exact = Some(tau);
        }
        Err(e) => r.error = Some(e.to_string()),
    }
    r
}

/// Evaluates every grid temperature (rows in parallel). Row failures are
/// recorded and do not stop the run.
pub fn temperature_curve<T, F>(run: &ThermometryRun<T>, optics: &Optics<T>, build: &F) -> Result<Vec<ThermometryRow<T>>>
where
    T: Real,
    F: Fn(T) -> Result<PhaseState<T>> + Sync,
{
    run.validate()?;
    let rows = run
        .temperatures
        .par_iter()
        .map(|&t| {
            let tp = t + run.delta_t;
            let mut row = ThermometryRow { temperature: t, temperature_plus: tp, indicator: None, budget: None, budget_plus: None, modes: Vec::new(), error: None, failure: None };
            let measured = (|| -> Result<(T, PhotonBudget<T>, PhotonBudget<T>)> {
                let lo = build(t)?;
                let hi = build(tp)?;
                let b_lo = PhotonBudget::measure(&lo, optics, &run.detector, &run.quadrature)?;
                let b_hi = PhotonBudget::measure(&hi, optics, &run.detector, &run.quadrature)?;
                Ok((lo.population_indicator(), b_lo, b_hi))
            })();
            match measured {
                Ok((ind, lo, hi)) => {
                    row.indicator = Some(ind);
                    row.modes = InterbandMode::ALL.iter().map(|m| mode_result(run, &lo, &hi, t, *m)).collect();
                    row.budget = Some(lo);
                    row.budget_plus = Some(hi);
                }
                Err(e) => {
                    row.error = Some(e.to_string());
                    row.failure = Some(e);
                }
            }
            row
        })
        .collect();
    Ok(rows)
}

/// Components that count as heating for a phase, for reporting.
pub fn heating_components(kind: PhaseKind, mode: InterbandMode) -> Vec<Component> {
    kind.inelastic_components().into_iter().filter(|c| mode != InterbandMode::Neglect || *c != Component::B).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repetition_rule() {
        assert_eq!(repetitions(100.0, 110.0, 0.1, 0.11).unwrap(), 1);
        assert_eq!(repetitions(1000.0, 1005.0, 0.1, 0.11).unwrap(), 40);
        assert!(matches!(repetitions(1000.0, 999.0, 0.1, 0.11), Err(Error::DegenerateSignal { .. })));
    }

    #[test]
    fn exposure_scaling() {
        let t1 = exposure_time(90.0, 3.0).unwrap();
        assert_eq!(exposure_time(180.0, 3.0).unwrap(), 2.0 * t1);
        assert_eq!(exposure_time(90.0, 6.0).unwrap(), 0.5 * t1);
        assert!((t1 * 3.0 - 90.0f64).abs() <= 1e-12 * 90.0);
        assert!(matches!(exposure_time(90.0, 0.0), Err(Error::UnboundedExposure)));
    }
}
