use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = SimError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    /// A model was evaluated outside the range it is defined on.
    #[error("{quantity} = {value} is outside the modeled domain [{min}, {max}]")]
    Domain {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("step size {step:e} s fell below the minimum {min_step:e} s at t = {t}")]
    StepUnderflow { t: f64, step: f64, min_step: f64 },

    #[error("covariance lost positive definiteness (min eigenvalue {min_eigenvalue:e})")]
    Covariance { min_eigenvalue: f64 },

    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    #[error("speed {speed} m/s is too low to continue ({0})", speed = .1)]
    Stall(&'static str, f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl SimError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        SimError::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        SimError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}

/// Returns `value` unchanged if finite, otherwise a [`SimError::NonFinite`] naming `what`.
pub(crate) fn finite(value: f64, what: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(SimError::NonFinite(what.to_string()))
    }
}
