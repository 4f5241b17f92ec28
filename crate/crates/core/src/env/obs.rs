//! Observation assembly: tracking errors, control context, and path
//! geometry, normalized per channel and clipped to [-1, 1].
//!
//! The state part is 34 values: measurement tracking error ȳ (13), reference
//! command (4), previous command (4), control margin (4), segment parameters
//! κ and γ (2), inertial position error (3), course encoding (2), course
//! error encoding (2). The failure vector λ (6) is kept separate: plain MLP
//! policies consume the 40-value concatenation, conditioned policies consume
//! the two parts through different inputs.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::disturbances::Measurement;
use crate::dynamics::Commands;
use crate::env::FailureVector;
use crate::error::{Error, Result};
use crate::math::{rotation_body_to_inertial, wrap_angle};
use crate::reference::ReferenceStep;

pub const STATE_DIM: usize = 34;
pub const LAMBDA_DIM: usize = 6;
pub const MLP_INPUT_DIM: usize = STATE_DIM + LAMBDA_DIM;

/// Per-channel normalization scales.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ObsScales {
    /// Rate errors, rad/s.
    pub omega: f64,
    /// Airspeed error, m/s.
    pub airspeed: f64,
    /// Roll/pitch errors, rad.
    pub roll_pitch: f64,
    /// Yaw error, rad.
    pub yaw: f64,
    /// Position errors (body and inertial), m.
    pub position: f64,
    /// Acceleration errors, m/s².
    pub accel: f64,
    /// Segment curvature, 1/m.
    pub kappa: f64,
    /// Segment flight path angle, rad.
    pub gamma: f64,
}

impl Default for ObsScales {
    fn default() -> Self {
        ObsScales {
            omega: 2.0,
            airspeed: 5.0,
            roll_pitch: std::f64::consts::FRAC_PI_2,
            yaw: std::f64::consts::PI,
            position: 25.0,
            accel: 10.0,
            kappa: 0.02,
            gamma: 0.21,
        }
    }
}

/// Policy observation: normalized state part plus the failure vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// 34 normalized state channels.
    pub state: Vec<f64>,
    /// Packed failure vector λ.
    pub lambda: [f64; 6],
}

impl Observation {
    /// Concatenated 40-value input for unconditioned policies.
    pub fn mlp_input(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(MLP_INPUT_DIM);
        v.extend_from_slice(&self.state);
        v.extend_from_slice(&self.lambda);
        v
    }
}

/// Control margin: per-channel normalized distance of the command from
/// saturation, equal to one at the reference command and zero at either
/// saturation limit.
pub fn control_margin(cmd: &Commands, ref_cmd: &Commands, sat: &[f64; 4]) -> Result<[f64; 4]> {
    let c = cmd.to_array();
    let r = ref_cmd.to_array();
    let mut m = [0.0; 4];
    for i in 0..4 {
        if r[i].abs() >= sat[i] {
            return Err(Error::Config(format!(
                "reference command {} at or beyond saturation {}",
                r[i], sat[i]
            )));
        }
        let upper = ((sat[i] - c[i]) / (sat[i] - r[i])).max(0.0);
        let lower = ((c[i] + sat[i]) / (r[i] + sat[i])).max(0.0);
        m[i] = upper.min(lower);
    }
    Ok(m)
}

/// Measurement-space tracking error against a reference step. Position error
/// is rotated into the body frame with the measured attitude; yaw and course
/// errors are wrapped.
#[derive(Debug, Clone, Copy)]
pub struct TrackingError {
    pub omega: Vector3<f64>,
    pub airspeed: f64,
    /// (φ̄, θ̄, ψ̄), rad.
    pub attitude: Vector3<f64>,
    /// Body-frame position error, m.
    pub position_body: Vector3<f64>,
    /// Inertial position error, m.
    pub position_inertial: Vector3<f64>,
    pub accel: Vector3<f64>,
    /// Wrapped course error χ − χ_ref, rad.
    pub course: f64,
}

pub fn tracking_error(meas: &Measurement, reference: &ReferenceStep) -> TrackingError {
    let p_err = meas.position - reference.position;
    let r_ib = rotation_body_to_inertial(meas.attitude.x, meas.attitude.y, meas.attitude.z);
    TrackingError {
        omega: meas.omega - reference.omega,
        airspeed: meas.airspeed - reference.airspeed,
        attitude: Vector3::new(
            meas.attitude.x - reference.attitude.x,
            meas.attitude.y - reference.attitude.y,
            wrap_angle(meas.attitude.z - reference.attitude.z),
        ),
        position_body: r_ib.transpose() * p_err,
        position_inertial: p_err,
        accel: meas.accel, // reference acceleration is zero at trim
        course: wrap_angle(meas.course - reference.course),
    }
}

/// The nine tracking-error channels used by the reward: body rates, then
/// (φ, θ, χ), then body-frame position.
pub fn reward_channels(err: &TrackingError) -> [f64; 9] {
    [
        err.omega.x,
        err.omega.y,
        err.omega.z,
        err.attitude.x,
        err.attitude.y,
        err.course,
        err.position_body.x,
        err.position_body.y,
        err.position_body.z,
    ]
}

/// Assemble the normalized observation.
pub fn build_observation(
    meas: &Measurement,
    reference: &ReferenceStep,
    cmd_prev: &Commands,
    margin: &[f64; 4],
    lambda: &FailureVector,
    sat: &[f64; 4],
    scales: &ObsScales,
) -> Observation {
    let err = tracking_error(meas, reference);
    let clip = |x: f64| x.clamp(-1.0, 1.0);
    let mut state = Vec::with_capacity(STATE_DIM);

    // ȳ: rates (3), airspeed (1), attitude (3), body position error (3),
    // acceleration (3).
    for i in 0..3 {
        state.push(clip(err.omega[i] / scales.omega));
    }
    state.push(clip(err.airspeed / scales.airspeed));
    state.push(clip(err.attitude.x / scales.roll_pitch));
    state.push(clip(err.attitude.y / scales.roll_pitch));
    state.push(clip(err.attitude.z / scales.yaw));
    for i in 0..3 {
        state.push(clip(err.position_body[i] / scales.position));
    }
    for i in 0..3 {
        state.push(clip(err.accel[i] / scales.accel));
    }

    // Reference and previous commands, normalized by saturation.
    for (cmds, _) in [(reference.commands, 0usize), (*cmd_prev, 1usize)] {
        let a = cmds.to_array();
        for i in 0..4 {
            state.push(clip(a[i] / sat[i]));
        }
    }

    // Margin mapped from [0, 1] to [-1, 1].
    for m in margin {
        state.push(clip(2.0 * m - 1.0));
    }

    // Segment parameters.
    state.push(clip(reference.kappa / scales.kappa));
    state.push(clip(reference.gamma / scales.gamma));

    // Inertial position error.
    for i in 0..3 {
        state.push(clip(err.position_inertial[i] / scales.position));
    }

    // Course and course-error encodings (unit magnitude by construction).
    state.push(meas.course.sin());
    state.push(meas.course.cos());
    state.push(err.course.sin());
    state.push(err.course.cos());

    debug_assert_eq!(state.len(), STATE_DIM);
    Observation {
        state,
        lambda: lambda.to_array(),
    }
}
