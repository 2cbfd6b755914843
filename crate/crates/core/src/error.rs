use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the solver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{what} at {omega} eV lies outside the tabulated range [{min}, {max}] eV and no extrapolation is configured")]
    OutOfRange {
        what: &'static str,
        omega: f64,
        min: f64,
        max: f64,
    },

    #[error("n,k table {source_name}: line {line}: {reason}")]
    Table {
        source_name: String,
        line: usize,
        reason: String,
    },

    #[error("i/o error on {path}: {reason}")]
    Io { path: String, reason: String },

    #[error("quadrature did not converge ({context}): estimate {estimate:e} ± {error:e} after {evaluations} evaluations")]
    NotConverged {
        context: String,
        estimate: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("Kramers-Kronig integral diverges: {0}")]
    KramersKronig(String),

    #[error("no sign change of Re ε on [{lo}, {hi}] eV")]
    NoRoot { lo: f64, hi: f64 },

    #[error("spectrum bandwidth too small: tail bound {tail:e} Pa exceeds 5% of the integral {integral:e} Pa")]
    Bandwidth { tail: f64, integral: f64 },

    #[error("no resonances above the prominence floor")]
    NoResonances,

    #[error("no interior FOM maximum at d = {d} nm")]
    NoInteriorMaximum { d: f64 },

    #[error("fit diverged: {0}")]
    FitDiverged(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures caused by numerical non-convergence rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotConverged { .. }
                | Error::KramersKronig(_)
                | Error::Bandwidth { .. }
                | Error::FitDiverged(_)
                | Error::NoRoot { .. }
                | Error::NoResonances
                | Error::NoInteriorMaximum { .. }
        )
    }
}
