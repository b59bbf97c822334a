//! Error types shared across the solver.
//!
//! One enum covers the whole crate: the failure modes are few, they are
//! almost all precondition violations detected before heavy compute, and a
//! single type keeps `Result` plumbing through the driver simple.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = CmError> = std::result::Result<T, E>;

/// All errors produced by the solver library.
#[derive(Debug, Error)]
pub enum CmError {
    /// Grid construction rejected its arguments (size too small, bad length).
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// An evaluation point contained a NaN or infinity.
    #[error("invalid evaluation point")]
    InvalidPoint,

    /// Two fields that must share a grid (same size and domain length) do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Mollifier width exceeds a quarter of the domain; the hat kernel would
    /// wrap onto itself and stop being a localized filter.
    #[error("mollifier too wide")]
    MollifierTooWide,

    /// Time extension was asked for a velocity before any field was pushed.
    #[error("empty velocity stack")]
    EmptyVelocityStack,

    /// A numeric parameter was outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The spectrum tail had fewer than the four positive shells an
    /// analyticity-radius fit needs.
    #[error("insufficient tail")]
    InsufficientTail,

    /// A render window had zero (or negative) area.
    #[error("degenerate render window: {0}")]
    DegenerateWindow(String),

    /// Sampled field values became non-finite while time stepping.
    #[error("numerical blow-up at t={t}")]
    Blowup {
        /// Simulation time at which non-finite values were detected.
        t: f64,
    },

    /// Configuration text failed to parse or violated an invariant.
    #[error("config error: {0}")]
    Config(String),

    /// An on-disk artifact was missing fields or internally inconsistent.
    #[error("malformed artifact: {0}")]
    Artifact(String),

    /// Underlying file-system failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// JSON sidecar or manifest failed to read or write.
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
