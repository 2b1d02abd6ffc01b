//! Error and warning types shared by every module.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration or construction parameter is invalid. `field` names
    /// the offending parameter.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// The requested evaluation exceeds the configured operation cap.
    #[error("budget exceeded: {required} operations requested, cap is {cap}")]
    Budget { required: u128, cap: u128 },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Non-fatal accuracy caveats attached to a computed value.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// The requested argument exceeds the range a fixed-order rule resolves.
    OscillationBudget { argument: f64, limit: f64 },
    /// A frequency annulus contains no lattice points.
    EmptyAnnulus { inner: f64, outer: f64 },
}

/// A value paired with an optional accuracy warning.
#[derive(Debug, Clone, PartialEq)]
pub struct Flagged<T> {
    pub value: T,
    pub warning: Option<Warning>,
}

impl<T> Flagged<T> {
    pub fn clean(value: T) -> Self {
        Flagged { value, warning: None }
    }

    pub fn is_clean(&self) -> bool {
        self.warning.is_none()
    }
}
