use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point outside the operator's domain: {0}")]
    Domain(String),

    #[error("non-finite integrand value at {at}")]
    NonFinite { at: String },

    #[error("non-integrable singularity at the singular parameter (local exponent {exponent} <= -2)")]
    NonIntegrable { exponent: i64 },

    #[error("no convergence after {steps} steps (last increment {increment:e})")]
    NoConvergence { steps: usize, increment: f64 },

    #[error("moment pairing j={j} differs between radii by {diff:e}; the function is not holomorphic on the annulus")]
    RadiusMismatch { j: u32, diff: f64 },

    #[error("function vanishes on all samples; slope undefined")]
    VanishingSamples,
}

impl Error {
    /// True for failures of a numerical limit process, as opposed to bad input.
    pub fn is_convergence(&self) -> bool {
        matches!(self, Error::NoConvergence { .. } | Error::RadiusMismatch { .. })
    }
}
