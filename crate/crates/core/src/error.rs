use thiserror::Error;

/// Broad failure category, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or out-of-range input.
    Input,
    /// The requested physical state is outside the model's validity.
    Physics,
    /// An iterative or adaptive numerical procedure failed to converge.
    Convergence,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("band structure not converged: band {band} at q index {q} moved by {delta:e} E_R when the cutoff was raised")]
    BandsNotConverged { band: usize, q: usize, delta: f64 },

    #[error("Wannier gauge fixing failed: {0}")]
    Gauge(String),

    #[error("infeasible filling: {atoms} atoms on {states} lowest-band states")]
    InfeasibleFilling { atoms: f64, states: usize },

    #[error("Bogoliubov dynamical instability at q index {q:?}: E~ = {e_tilde:e}, N0*U_q = {coupling:e}")]
    DynamicalInstability { q: [usize; 3], e_tilde: f64, coupling: f64 },

    #[error("condensate depletion {depletion:.4} exceeds validity limit {limit}")]
    DepletionTooLarge { depletion: f64, limit: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { what: String, iterations: usize, residual: f64 },

    #[error("sum rule violated: component {value:e} below tolerance -{tolerance:e}")]
    SumRule { value: f64, tolerance: f64 },

    #[error("quadrature did not converge: worst panel [{lo}, {hi}] with error estimate {error:e}")]
    Quadrature { lo: f64, hi: f64, error: f64 },

    #[error("zero inelastic scattering rate: exposure time is unbounded")]
    UnboundedExposure,

    #[error("collected signal does not increase between T = {t:e} and T + dT = {t_plus:e}")]
    DegenerateSignal { t: f64, t_plus: f64 },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidInput(_) | Error::IndexOutOfRange(_) => ErrorKind::Input,
            Error::InfeasibleFilling { .. }
            | Error::DynamicalInstability { .. }
            | Error::DepletionTooLarge { .. }
            | Error::UnboundedExposure
            | Error::DegenerateSignal { .. } => ErrorKind::Physics,
            Error::BandsNotConverged { .. }
            | Error::Gauge(_)
            | Error::NotConverged { .. }
            | Error::SumRule { .. }
            | Error::Quadrature { .. } => ErrorKind::Convergence,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
