use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition of an operation was not met by the caller.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid material `{name}`: {reason}")]
    InvalidMaterial { name: String, reason: String },

    #[error("invalid parameter `{param}`: {reason}")]
    InvalidParameter { param: String, reason: String },

    #[error("point ({x:.6}, {z:.6}) mm is outside the {what}")]
    OutOfDomain { what: String, x: f64, z: f64 },

    /// The central-difference stencil straddles a region boundary.
    #[error("stiffness gradient unavailable at ({x:.6}, {z:.6}) mm: stencil crosses a region boundary")]
    GradientUnavailable { x: f64, z: f64 },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn param(param: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            param: param.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for configuration/parse problems, false for physics/domain ones.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Io { .. } | Error::InvalidMaterial { .. })
    }
}
