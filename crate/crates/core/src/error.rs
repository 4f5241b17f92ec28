//! Shared error type for the workbench.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Airspeed fell below the validity floor of the aerodynamic model.
    #[error("airspeed {airspeed:.3} m/s below validity floor {floor:.3} m/s")]
    LowAirspeed { airspeed: f64, floor: f64 },

    /// A state derivative or integration step produced a non-finite value.
    #[error("integration failure: non-finite state at t = {t:.3} s")]
    IntegrationFailure { t: f64 },

    /// Course angle is undefined for a zero velocity vector.
    #[error("course angle undefined for zero velocity")]
    UndefinedCourse,

    /// Trim solver failed to converge.
    #[error("trim solve (kappa={kappa}, gamma={gamma}) did not converge: residual {residual:.3e} after {iters} iterations")]
    TrimFailure {
        kappa: f64,
        gamma: f64,
        residual: f64,
        iters: usize,
    },

    /// Environment was stepped after it reported done.
    #[error("environment stepped after episode completion")]
    StepAfterDone,

    /// Inconsistent tensor shapes in a network operation.
    #[error("shape mismatch in {op}: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },

    /// Bad configuration value.
    #[error("config error: {0}")]
    Config(String),

    /// Checkpoint cannot be used for the requested operation.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
