//! Fault-tolerant flight-control workbench for a fixed-wing small UAS.
//!
//! The crate simulates a six-degree-of-freedom fixed-wing aircraft with
//! first-order actuators and injectable stuck-surface failures, builds
//! trim-derived reference paths from motion primitives, wraps everything in a
//! reinforcement-learning environment, and trains failure-conditioned
//! path-following policies (plain MLP, scale/shift-modulated, and low-rank
//! adapted) with PPO. Evaluation protocols cover persistent stuck failures
//! and nonstationary "flutter" failures, with path-error metrics and
//! spectral-norm sensitivity reports.
//!
//! Coordinate conventions:
//! - Inertial frame: North-East-Down (NED); down is positive z.
//! - Body frame: x forward, y out the right wing, z down.
//! - Attitude: Euler angles (roll φ, pitch θ, yaw ψ), valid for |θ| < π/2.

pub mod config;
pub mod disturbances;
pub mod dynamics;
pub mod env;
pub mod error;
pub mod eval;
pub mod math;
pub mod nets;
pub mod ppo;
pub mod reference;

pub use config::{AirframeFile, RunConfig};
pub use dynamics::{AircraftState, AirframeParams, Actuators};
pub use env::{Env, FailureVector, Observation, ScenarioSpec};
pub use error::Error;
pub use nets::{ArchTag, PolicyParams};
pub use reference::{ReferencePath, TrimCondition};
