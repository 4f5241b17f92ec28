//! Continuous-time 6-DOF fixed-wing dynamics with a stability-derivative
//! aerodynamic model, first-order actuators with stuck-failure overrides, and
//! fixed-step RK4 integration.
//!
//! The rigid-body states are inertial position `p` (NED, m), body-frame
//! velocity `v` (m/s), Euler attitude `θ = (φ, θ, ψ)` (rad), and body rates
//! `ω = (p, q, r)` (rad/s). Actuators are elevator, left/right aileron,
//! rudder (rad) and throttle (rev/s); the two aileron surfaces share one
//! command channel but can fail independently.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::env::FailureVector;
use crate::error::{Error, Result};
use crate::math::{euler_rate_matrix, rotation_body_to_inertial};

/// Airspeed validity floor (m/s). Below this the regressors α, β, 𝒥 are
/// ill-conditioned and the episode is treated as model-invalid.
pub const V_MIN: f64 = 3.0;

/// Realized actuator outputs. Surfaces in rad, throttle in rev/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Actuators {
    pub elevator: f64,
    pub aileron_left: f64,
    pub aileron_right: f64,
    pub rudder: f64,
    pub throttle: f64,
}

impl Actuators {
    pub fn zero() -> Self {
        Actuators {
            elevator: 0.0,
            aileron_left: 0.0,
            aileron_right: 0.0,
            rudder: 0.0,
            throttle: 0.0,
        }
    }

    /// Effective aileron deflection ½(δ_Al + δ_Ar).
    pub fn aileron_effective(&self) -> f64 {
        0.5 * (self.aileron_left + self.aileron_right)
    }

    /// Differential aileron deflection δ_Ar − δ_Al (asymmetry).
    pub fn aileron_differential(&self) -> f64 {
        self.aileron_right - self.aileron_left
    }
}

/// Commanded inputs on the four control channels: elevator, aileron
/// (single shared channel for both surfaces), rudder, throttle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Commands {
    pub elevator: f64,
    pub aileron: f64,
    pub rudder: f64,
    pub throttle: f64,
}

impl Commands {
    pub fn to_array(self) -> [f64; 4] {
        [self.elevator, self.aileron, self.rudder, self.throttle]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Commands {
            elevator: a[0],
            aileron: a[1],
            rudder: a[2],
            throttle: a[3],
        }
    }
}

/// Rigid-body state plus realized actuator outputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AircraftState {
    /// Inertial NED position, m.
    pub p: Vector3<f64>,
    /// Body-frame linear velocity, m/s.
    pub v: Vector3<f64>,
    /// Euler angles (φ, θ, ψ), rad.
    pub theta: Vector3<f64>,
    /// Body rates (p, q, r), rad/s.
    pub omega: Vector3<f64>,
    /// Realized actuator outputs.
    pub delta: Actuators,
}

impl AircraftState {
    pub fn rotation_body_to_inertial(&self) -> Matrix3<f64> {
        rotation_body_to_inertial(self.theta.x, self.theta.y, self.theta.z)
    }

    pub fn is_finite(&self) -> bool {
        self.p.iter().all(|x| x.is_finite())
            && self.v.iter().all(|x| x.is_finite())
            && self.theta.iter().all(|x| x.is_finite())
            && self.omega.iter().all(|x| x.is_finite())
    }
}

/// Non-dimensional aerodynamic coefficient table.
///
/// Lift and drag are built in stability axes (C_lift linear in α, q̂, δ_E;
/// C_drag parabolic in C_lift) and rotated into body X/Z. Lateral
/// coefficients are linear in β, p̂, r̂, δ_A_eff, δ_R. Pitch is linear in α,
/// q̂, δ_E plus the asymmetric-aileron term. Thrust enters C_X through a
/// quadratic in the inverse advance ratio 𝒥 = δ_T·D_prop/V_r.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AeroCoeffs {
    pub c_lift_0: f64,
    pub c_lift_alpha: f64,
    pub c_lift_q: f64,
    pub c_lift_delta_e: f64,
    pub c_drag_0: f64,
    pub c_drag_k: f64,
    pub c_y_beta: f64,
    pub c_y_p: f64,
    pub c_y_r: f64,
    pub c_y_delta_a: f64,
    pub c_y_delta_r: f64,
    pub c_l_beta: f64,
    pub c_l_p: f64,
    pub c_l_r: f64,
    pub c_l_delta_a: f64,
    pub c_l_delta_r: f64,
    pub c_m_0: f64,
    pub c_m_alpha: f64,
    pub c_m_q: f64,
    pub c_m_delta_e: f64,
    pub c_n_beta: f64,
    pub c_n_p: f64,
    pub c_n_r: f64,
    pub c_n_delta_a: f64,
    pub c_n_delta_r: f64,
    pub c_x_j1: f64,
    pub c_x_j2: f64,
}

/// Airframe parameters: mass/inertia, geometry, aero table, actuator lags and
/// saturation limits. Values ship as config data for a representative
/// 3 kg-class fixed-wing trainer; they are not an identified airframe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AirframeParams {
    pub mass: f64,
    pub gravity: f64,
    pub j_xx: f64,
    pub j_yy: f64,
    pub j_zz: f64,
    pub j_xz: f64,
    /// Mean aerodynamic chord, m.
    pub chord: f64,
    /// Wingspan, m.
    pub span: f64,
    /// Reference wing area, m².
    pub area: f64,
    /// Propeller diameter, m.
    pub d_prop: f64,
    /// Air density, kg/m³.
    pub rho: f64,
    pub coeffs: AeroCoeffs,
    /// Pitching-moment coefficient on differential aileron deflection.
    pub c_m_delta_a_diff: f64,
    /// First-order actuator time constants, s: [elevator, aileron, rudder, throttle].
    pub tau: [f64; 4],
    /// Saturation limits: surfaces ±sat rad, throttle [0, sat] rev/s:
    /// [elevator, aileron, rudder, throttle].
    pub sat: [f64; 4],
}

impl AirframeParams {
    /// Inertia matrix (x-z plane symmetry).
    pub fn inertia(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.j_xx, 0.0, -self.j_xz, //
            0.0, self.j_yy, 0.0, //
            -self.j_xz, 0.0, self.j_zz,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.mass <= 0.0 || self.chord <= 0.0 || self.span <= 0.0 || self.area <= 0.0 {
            return Err(Error::Config(
                "mass and geometric quantities must be positive".into(),
            ));
        }
        if self.d_prop <= 0.0 || self.rho <= 0.0 {
            return Err(Error::Config("d_prop and rho must be positive".into()));
        }
        // Positive definiteness of the symmetric inertia matrix.
        if self.j_xx <= 0.0
            || self.j_yy <= 0.0
            || self.j_zz <= 0.0
            || self.j_xx * self.j_zz - self.j_xz * self.j_xz <= 0.0
        {
            return Err(Error::Config("inertia matrix not positive definite".into()));
        }
        if self.tau.iter().any(|t| *t <= 0.0) || self.sat.iter().any(|s| *s <= 0.0) {
            return Err(Error::Config(
                "actuator time constants and saturations must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Representative 3 kg-class trainer used by tests and shipped configs.
    pub fn default_3kg() -> Self {
        AirframeParams {
            mass: 3.2,
            gravity: 9.81,
            j_xx: 0.12,
            j_yy: 0.17,
            j_zz: 0.26,
            j_xz: 0.015,
            chord: 0.25,
            span: 1.8,
            area: 0.45,
            d_prop: 0.30,
            rho: 1.225,
            coeffs: AeroCoeffs {
                c_lift_0: 0.23,
                c_lift_alpha: 5.0,
                c_lift_q: 5.5,
                c_lift_delta_e: 0.25,
                c_drag_0: 0.055,
                c_drag_k: 0.060,
                c_y_beta: -0.40,
                c_y_p: 0.0,
                c_y_r: 0.12,
                c_y_delta_a: 0.0,
                c_y_delta_r: 0.15,
                c_l_beta: -0.06,
                c_l_p: -0.42,
                c_l_r: 0.065,
                c_l_delta_a: 0.145,
                c_l_delta_r: 0.006,
                c_m_0: 0.02,
                c_m_alpha: -1.35,
                c_m_q: -16.0,
                c_m_delta_e: -0.85,
                c_n_beta: 0.065,
                c_n_p: -0.035,
                c_n_r: -0.10,
                c_n_delta_a: -0.006,
                c_n_delta_r: -0.09,
                c_x_j1: -0.010,
                c_x_j2: 0.030,
            },
            c_m_delta_a_diff: -0.02,
            tau: [0.05, 0.05, 0.05, 0.2],
            sat: [0.4, 0.4, 0.4, 180.0],
        }
    }
}

/// Air data and the resulting forces/moments for one evaluation of the
/// aerodynamic model.
#[derive(Debug, Clone, Copy)]
pub struct AeroOutputs {
    /// Airspeed ‖v_r‖, m/s.
    pub airspeed: f64,
    /// Angle of attack, rad.
    pub alpha: f64,
    /// Sideslip angle, rad.
    pub beta: f64,
    /// Dynamic pressure ½ρV_r², Pa.
    pub qbar: f64,
    /// Six coefficients [C_X, C_Y, C_Z, C_L, C_M, C_N].
    pub coeffs: [f64; 6],
    /// Body-frame aerodynamic + thrust force, N.
    pub force: Vector3<f64>,
    /// Body-frame moment, N·m.
    pub moment: Vector3<f64>,
}

/// Time derivative of the rigid-body states.
#[derive(Debug, Clone, Copy)]
pub struct StateDerivative {
    pub p_dot: Vector3<f64>,
    pub v_dot: Vector3<f64>,
    pub theta_dot: Vector3<f64>,
    pub omega_dot: Vector3<f64>,
}

/// Air-relative velocity in the body frame: v − R_Ibᵀ(θ)·v_wind.
pub fn air_relative_velocity(state: &AircraftState, wind_inertial: Vector3<f64>) -> Vector3<f64> {
    state.v - state.rotation_body_to_inertial().transpose() * wind_inertial
}

/// Airspeed, angle of attack and sideslip from the body-frame air-relative
/// velocity. Errors below the airspeed validity floor.
pub fn aero_angles(v_r: Vector3<f64>) -> Result<(f64, f64, f64)> {
    let airspeed = v_r.norm();
    if !airspeed.is_finite() || airspeed < V_MIN {
        return Err(Error::LowAirspeed {
            airspeed,
            floor: V_MIN,
        });
    }
    let alpha = v_r.z.atan2(v_r.x);
    let beta = (v_r.y / airspeed).asin();
    Ok((airspeed, alpha, beta))
}

/// Non-dimensional body rates (p̂, q̂, r̂) for the aerodynamic regressors.
fn nondim_rates(omega: Vector3<f64>, airspeed: f64, params: &AirframeParams) -> (f64, f64, f64) {
    let denom = 2.0 * airspeed;
    (
        omega.x * params.span / denom,
        omega.y * params.chord / denom,
        omega.z * params.span / denom,
    )
}

/// The six aerodynamic coefficients [C_X, C_Y, C_Z, C_L, C_M, C_N] including
/// thrust in C_X, the asymmetric-aileron pitch term, and the additive
/// perturbation Δ_C.
pub fn aero_coefficients(
    alpha: f64,
    beta: f64,
    airspeed: f64,
    omega: Vector3<f64>,
    delta: &Actuators,
    perturb: &[f64; 6],
    params: &AirframeParams,
) -> [f64; 6] {
    let c = &params.coeffs;
    let (p_hat, q_hat, r_hat) = nondim_rates(omega, airspeed, params);
    let delta_a_eff = delta.aileron_effective();
    let delta_a_diff = delta.aileron_differential();

    let c_lift = c.c_lift_0
        + c.c_lift_alpha * alpha
        + c.c_lift_q * q_hat
        + c.c_lift_delta_e * delta.elevator;
    let c_drag = c.c_drag_0 + c.c_drag_k * c_lift * c_lift;

    // Inverse advance ratio for the propeller model.
    let j_inv = delta.throttle * params.d_prop / airspeed;
    let c_thrust = c.c_x_j2 * j_inv * j_inv + c.c_x_j1 * j_inv;

    let (sa, ca) = alpha.sin_cos();
    let c_x = -c_drag * ca + c_lift * sa + c_thrust;
    let c_z = -c_drag * sa - c_lift * ca;

    let c_y = c.c_y_beta * beta
        + c.c_y_p * p_hat
        + c.c_y_r * r_hat
        + c.c_y_delta_a * delta_a_eff
        + c.c_y_delta_r * delta.rudder;
    let c_l = c.c_l_beta * beta
        + c.c_l_p * p_hat
        + c.c_l_r * r_hat
        + c.c_l_delta_a * delta_a_eff
        + c.c_l_delta_r * delta.rudder;
    let c_m = c.c_m_0
        + c.c_m_alpha * alpha
        + c.c_m_q * q_hat
        + c.c_m_delta_e * delta.elevator
        + params.c_m_delta_a_diff * delta_a_diff;
    let c_n = c.c_n_beta * beta
        + c.c_n_p * p_hat
        + c.c_n_r * r_hat
        + c.c_n_delta_a * delta_a_eff
        + c.c_n_delta_r * delta.rudder;

    [
        c_x + perturb[0],
        c_y + perturb[1],
        c_z + perturb[2],
        c_l + perturb[3],
        c_m + perturb[4],
        c_n + perturb[5],
    ]
}

/// Full aerodynamic evaluation: air data, coefficients, force and moment.
pub fn aero_forces_moments(
    state: &AircraftState,
    wind_inertial: Vector3<f64>,
    perturb: &[f64; 6],
    params: &AirframeParams,
) -> Result<AeroOutputs> {
    let v_r = air_relative_velocity(state, wind_inertial);
    let (airspeed, alpha, beta) = aero_angles(v_r)?;
    let qbar = 0.5 * params.rho * airspeed * airspeed;
    let coeffs = aero_coefficients(alpha, beta, airspeed, state.omega, &state.delta, perturb, params);
    let qs = qbar * params.area;
    let force = Vector3::new(qs * coeffs[0], qs * coeffs[1], qs * coeffs[2]);
    let moment = Vector3::new(
        qs * params.span * coeffs[3],
        qs * params.chord * coeffs[4],
        qs * params.span * coeffs[5],
    );
    Ok(AeroOutputs {
        airspeed,
        alpha,
        beta,
        qbar,
        coeffs,
        force,
        moment,
    })
}

/// Time derivative of (p, v, θ, ω):
///
/// ṗ = R_Ib v,  θ̇ = ε(φ,θ) ω,
/// v̇ = v×ω + R_Ibᵀ [0,0,g]ᵀ + F/m,
/// ω̇ = J⁻¹ (Jω×ω + M).
pub fn state_derivative(
    state: &AircraftState,
    wind_inertial: Vector3<f64>,
    perturb: &[f64; 6],
    params: &AirframeParams,
) -> Result<StateDerivative> {
    let aero = aero_forces_moments(state, wind_inertial, perturb, params)?;
    let r_ib = state.rotation_body_to_inertial();
    let gravity_body = r_ib.transpose() * Vector3::new(0.0, 0.0, params.gravity);
    let j = params.inertia();
    let j_inv = j
        .try_inverse()
        .expect("inertia matrix validated positive definite");

    Ok(StateDerivative {
        p_dot: r_ib * state.v,
        v_dot: state.v.cross(&state.omega) + gravity_body + aero.force / params.mass,
        theta_dot: euler_rate_matrix(state.theta.x, state.theta.y) * state.omega,
        omega_dot: j_inv * ((j * state.omega).cross(&state.omega) + aero.moment),
    })
}

/// One exact first-order lag step for every actuator channel, with stuck
/// failures overriding their surface and outputs clipped to saturation.
///
/// Healthy channels follow δ′ = δ_cmd_sat + (δ − δ_cmd_sat)·e^(−dt/τ) toward
/// the saturated command. A channel with λ_fail = 1 is pinned at
/// λ_val·δ_sat regardless of the command.
pub fn actuator_step(
    delta: &Actuators,
    cmd: &Commands,
    lambda: &FailureVector,
    dt: f64,
    params: &AirframeParams,
) -> Actuators {
    let lag = |current: f64, target: f64, tau: f64| -> f64 {
        target + (current - target) * (-dt / tau).exp()
    };
    let sat = params.sat;

    let e_cmd = cmd.elevator.clamp(-sat[0], sat[0]);
    let a_cmd = cmd.aileron.clamp(-sat[1], sat[1]);
    let r_cmd = cmd.rudder.clamp(-sat[2], sat[2]);
    let t_cmd = cmd.throttle.clamp(0.0, sat[3]);

    let aileron_right = if lambda.right_aileron.failed {
        lambda.right_aileron.level * sat[1]
    } else {
        lag(delta.aileron_right, a_cmd, params.tau[1])
    };
    let aileron_left = if lambda.left_aileron.failed {
        lambda.left_aileron.level * sat[1]
    } else {
        lag(delta.aileron_left, a_cmd, params.tau[1])
    };
    let rudder = if lambda.rudder.failed {
        lambda.rudder.level * sat[2]
    } else {
        lag(delta.rudder, r_cmd, params.tau[2])
    };

    Actuators {
        elevator: lag(delta.elevator, e_cmd, params.tau[0]).clamp(-sat[0], sat[0]),
        aileron_left: aileron_left.clamp(-sat[1], sat[1]),
        aileron_right: aileron_right.clamp(-sat[1], sat[1]),
        rudder: rudder.clamp(-sat[2], sat[2]),
        throttle: lag(delta.throttle, t_cmd, params.tau[3]).clamp(0.0, sat[3]),
    }
}

/// Classical RK4 update of (p, v, θ, ω) over one fixed step. Actuator
/// outputs are held constant; `actuator_step` runs separately at the control
/// rate. Errors if any stage produces a non-finite derivative.
pub fn rk4_step(
    state: &AircraftState,
    wind_inertial: Vector3<f64>,
    perturb: &[f64; 6],
    dt: f64,
    params: &AirframeParams,
) -> Result<AircraftState> {
    let add = |s: &AircraftState, d: &StateDerivative, h: f64| -> AircraftState {
        AircraftState {
            p: s.p + d.p_dot * h,
            v: s.v + d.v_dot * h,
            theta: s.theta + d.theta_dot * h,
            omega: s.omega + d.omega_dot * h,
            delta: s.delta,
        }
    };

    let k1 = state_derivative(state, wind_inertial, perturb, params)?;
    let k2 = state_derivative(&add(state, &k1, 0.5 * dt), wind_inertial, perturb, params)?;
    let k3 = state_derivative(&add(state, &k2, 0.5 * dt), wind_inertial, perturb, params)?;
    let k4 = state_derivative(&add(state, &k3, dt), wind_inertial, perturb, params)?;

    let sixth = dt / 6.0;
    let next = AircraftState {
        p: state.p + (k1.p_dot + 2.0 * k2.p_dot + 2.0 * k3.p_dot + k4.p_dot) * sixth,
        v: state.v + (k1.v_dot + 2.0 * k2.v_dot + 2.0 * k3.v_dot + k4.v_dot) * sixth,
        theta: state.theta + (k1.theta_dot + 2.0 * k2.theta_dot + 2.0 * k3.theta_dot + k4.theta_dot) * sixth,
        omega: state.omega + (k1.omega_dot + 2.0 * k2.omega_dot + 2.0 * k3.omega_dot + k4.omega_dot) * sixth,
        delta: state.delta,
    };
    if !next.is_finite() {
        return Err(Error::IntegrationFailure { t: f64::NAN });
    }
    Ok(next)
}

/// Flight path angle γ and course angle χ from the inertial velocity.
pub fn path_angles(p_dot: Vector3<f64>) -> Result<(f64, f64)> {
    let horiz = (p_dot.x * p_dot.x + p_dot.y * p_dot.y).sqrt();
    if horiz == 0.0 && p_dot.z == 0.0 {
        return Err(Error::UndefinedCourse);
    }
    Ok(((-p_dot.z).atan2(horiz), p_dot.y.atan2(p_dot.x)))
}
