use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid does not resolve the packet: {0}")]
    GridResolution(String),

    #[error("probability left the simulation box: edge mass {edge_mass:.3e} exceeds {limit:.1e}")]
    DriftOutOfBox { edge_mass: f64, limit: f64 },

    #[error("numerical failure in {op}: {detail}")]
    NumericalFailure { op: &'static str, detail: String },

    #[error("malformed data file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn numerical(op: &'static str, detail: impl Into<String>) -> Self {
        Error::NumericalFailure {
            op,
            detail: detail.into(),
        }
    }

    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_invalid_input(&self) -> bool {
        matches!(self, Error::InvalidParameter { .. } | Error::GridResolution(_) | Error::Format(_))
    }
}
