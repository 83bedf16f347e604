use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The integrated state left the finite region (non-finite or norm above the guard).
    #[error("integration blew up at t = {time}; last finite step index {last_finite_step}")]
    BlowUp { last_finite_step: usize, time: f64 },

    #[error("no unique fixed point (discriminant = {delta})")]
    NotUniqueFixedPoint { delta: f64 },

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("singular state: {0}")]
    Singular(String),

    #[error("sigmoid fit failed: {0}")]
    FitFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
