use thiserror::Error;

use crate::dynamics::{Diagnostics, Law};

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// State of an integration at the moment a non-finite value appeared.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct NonFiniteSnapshot {
    pub law: Law,
    pub step: usize,
    pub time: f64,
    /// Diagnostics of the last finite sample.
    pub last_finite: Diagnostics,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("representation error: {0}")]
    Representation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("purity error: trace(rho^2) = {purity} is not within tolerance of 1")]
    Purity { purity: f64 },

    #[error("degenerate branch: theta_n = theta_e = {theta}")]
    DegenerateBranch { theta: f64 },

    #[error("field evaluated at t = {t}, outside the tabulated range [{start}, {end}]")]
    FieldOutOfRange { t: f64, start: f64, end: f64 },

    #[error(
        "non-finite state in {} law at step {} (t = {}); last finite norm_dev = {:e}, purity_dev = {:e}",
        .0.law, .0.step, .0.time, .0.last_finite.norm_dev, .0.last_finite.purity_dev
    )]
    NonFinite(Box<NonFiniteSnapshot>),

    #[error("state representation does not match the {law} law")]
    StateMismatch { law: Law },

    #[error("expected a {expected} trajectory, got {found}")]
    WrongLaw { expected: Law, found: Law },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
