//! Error type shared by the whole crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument to a constructor or operation.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Degenerate geometry (coincident points, zero-norm direction, ...).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Sequence capacity: too few OFDM symbols for the requested RIS count.
    #[error("sequence capacity: {0}")]
    Capacity(String),

    /// Physical model outside its validity region (e.g. grazing incidence).
    #[error("model domain: {0}")]
    ModelDomain(String),

    /// Label bookkeeping violated a contract (duplicate, missing, mismatched).
    #[error("label contract: {0}")]
    Label(String),

    /// Jacobian is singular for a specific path/angle.
    #[error("jacobian singular on path {path}: {angle} has no azimuth direction (local x^2+y^2 ~ 0)")]
    JacobianSingular { path: usize, angle: &'static str },

    /// Scenario file could not be parsed.
    #[error("scenario parse error: {0}")]
    Parse(String),

    /// Scenario failed semantic validation.
    #[error("scenario invalid: {0}")]
    Scenario(String),
}

pub type Result<V> = std::result::Result<V, Error>;
