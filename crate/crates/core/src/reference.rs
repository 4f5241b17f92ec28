//! Trim computation and reference path generation from motion primitives.
//!
//! Each segment of a reference path is a steady-state trim (straight, turn,
//! climb, or climbing turn) at the nominal airspeed, propagated in closed
//! form and sampled at the control step. Segments chain continuously in
//! position and heading. During an episode the reference index advances by
//! projecting the aircraft position onto the local stretch of path, which
//! relaxes timing and lets the controller prioritize geometric tracking.

use nalgebra::{DMatrix, DVector, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{state_derivative, Actuators, AircraftState, AirframeParams, Commands};
use crate::error::{Error, Result};
use crate::math::{body_rates_for_turn, rotation_body_to_inertial, wrap_angle};

/// Nominal airspeed for all trim conditions, m/s.
pub const V_NOM: f64 = 21.0;

/// Inverse turn radii available to the path sampler, 1/m.
pub const KAPPA_SET: [f64; 4] = [-0.02, -0.012, 0.012, 0.02];

/// Flight path angles available to the path sampler, rad.
pub const GAMMA_SET: [f64; 5] = [-0.21, -0.11, 0.0, 0.11, 0.21];

/// Forward projection window for reference advancement: one second of
/// nominal travel, expressed in control steps.
pub const SEARCH_WINDOW_STEPS: usize = 25;

/// Maximum reference-index advance per control step.
pub const MAX_ADVANCE_STEPS: usize = 3;

/// A solved steady-flight equilibrium.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrimCondition {
    /// Inverse turn radius, 1/m.
    pub kappa: f64,
    /// Flight path angle, rad.
    pub gamma: f64,
    /// Airspeed, m/s.
    pub airspeed: f64,
    /// Body-frame velocity at trim, m/s.
    pub v: Vector3<f64>,
    /// Roll and pitch at trim (yaw is free), rad.
    pub phi: f64,
    pub theta: f64,
    /// Body rates at trim, rad/s.
    pub omega: Vector3<f64>,
    /// Trim commands.
    pub commands: Commands,
    /// Norm of (v̇, ω̇) at the solution.
    pub residual: f64,
}

impl TrimCondition {
    /// Yaw rate of the steady turn, rad/s.
    pub fn psi_dot(&self) -> f64 {
        self.airspeed * self.kappa / self.gamma.cos()
    }

    /// Realized actuator outputs at trim (both ailerons on the shared command).
    pub fn actuators(&self) -> Actuators {
        Actuators {
            elevator: self.commands.elevator,
            aileron_left: self.commands.aileron,
            aileron_right: self.commands.aileron,
            rudder: self.commands.rudder,
            throttle: self.commands.throttle,
        }
    }

    /// Aircraft state on the trim at a given pose.
    pub fn state_at(&self, position: Vector3<f64>, psi: f64) -> AircraftState {
        AircraftState {
            p: position,
            v: self.v,
            theta: Vector3::new(self.phi, self.theta, psi),
            omega: self.omega,
            delta: self.actuators(),
        }
    }
}

/// Trim state construction shared by the solver residual and the result:
/// velocity from the χ = ψ constraint, rates from the steady yaw rate.
fn trim_state(
    phi: f64,
    theta: f64,
    cmd: &Commands,
    airspeed: f64,
    gamma: f64,
    psi_dot: f64,
) -> AircraftState {
    let r_ib = rotation_body_to_inertial(phi, theta, 0.0);
    let v_inertial = Vector3::new(
        airspeed * gamma.cos(),
        0.0,
        -airspeed * gamma.sin(),
    );
    AircraftState {
        p: Vector3::zeros(),
        v: r_ib.transpose() * v_inertial,
        theta: Vector3::new(phi, theta, 0.0),
        omega: body_rates_for_turn(phi, theta, psi_dot),
        delta: Actuators {
            elevator: cmd.elevator,
            aileron_left: cmd.aileron,
            aileron_right: cmd.aileron,
            rudder: cmd.rudder,
            throttle: cmd.throttle,
        },
    }
}

fn trim_residual(
    u: &DVector<f64>,
    airspeed: f64,
    gamma: f64,
    psi_dot: f64,
    params: &AirframeParams,
) -> Result<DVector<f64>> {
    let cmd = Commands {
        elevator: u[2],
        aileron: u[3],
        rudder: u[4],
        throttle: u[5],
    };
    let state = trim_state(u[0], u[1], &cmd, airspeed, gamma, psi_dot);
    let d = state_derivative(&state, Vector3::zeros(), &[0.0; 6], params)?;
    Ok(DVector::from_vec(vec![
        d.v_dot.x, d.v_dot.y, d.v_dot.z, d.omega_dot.x, d.omega_dot.y, d.omega_dot.z,
    ]))
}

/// Solve the steady-turn/steady-climb equilibrium with a damped Newton
/// iteration on (v̇, ω̇) = 0, under the constraints ‖v_r‖ = V, ψ̇ = Vκ/cos γ
/// and χ = ψ (wind-free). Unknowns: φ, θ, δ_E, δ_A, δ_R, δ_T.
pub fn solve_trim(
    kappa: f64,
    gamma: f64,
    airspeed: f64,
    params: &AirframeParams,
) -> Result<TrimCondition> {
    let psi_dot = airspeed * kappa / gamma.cos();
    let c = &params.coeffs;

    // Coordinated-turn initial guess.
    let phi0 = (airspeed * airspeed * kappa / params.gravity).atan();
    let qbar_s = 0.5 * params.rho * airspeed * airspeed * params.area;
    let c_lift_req = params.mass * params.gravity * gamma.cos() / (qbar_s * phi0.cos());
    let alpha0 = (c_lift_req - c.c_lift_0) / c.c_lift_alpha;
    let theta0 = alpha0 + gamma;
    let elev0 = -(c.c_m_0 + c.c_m_alpha * alpha0) / c.c_m_delta_e;
    let c_thrust_req = (c.c_drag_0 + c.c_drag_k * c_lift_req * c_lift_req
        + params.mass * params.gravity * gamma.sin() / qbar_s)
        .max(0.0);
    let j_inv0 = (-c.c_x_j1 + (c.c_x_j1 * c.c_x_j1 + 4.0 * c.c_x_j2 * c_thrust_req).sqrt())
        / (2.0 * c.c_x_j2);
    let throttle0 = j_inv0 * airspeed / params.d_prop;

    let mut u = DVector::from_vec(vec![phi0, theta0, elev0, 0.0, 0.0, throttle0]);
    let mut f = trim_residual(&u, airspeed, gamma, psi_dot, params)?;
    let mut f_norm = f.norm();

    let max_iters = 60;
    for _ in 0..max_iters {
        if f_norm < 1e-10 {
            break;
        }
        // Central-difference Jacobian.
        let mut jac = DMatrix::zeros(6, 6);
        for j in 0..6 {
            let h = 1e-6 * u[j].abs().max(1.0);
            let mut up = u.clone();
            let mut um = u.clone();
            up[j] += h;
            um[j] -= h;
            let fp = trim_residual(&up, airspeed, gamma, psi_dot, params)?;
            let fm = trim_residual(&um, airspeed, gamma, psi_dot, params)?;
            for i in 0..6 {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let du = jac.lu().solve(&(-&f)).ok_or(Error::TrimFailure {
            kappa,
            gamma,
            residual: f_norm,
            iters: max_iters,
        })?;

        // Backtracking line search on the residual norm.
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand = &u + &du * step;
            if let Ok(fc) = trim_residual(&cand, airspeed, gamma, psi_dot, params) {
                let n = fc.norm();
                if n < f_norm {
                    u = cand;
                    f = fc;
                    f_norm = n;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    if f_norm >= 1e-6 {
        return Err(Error::TrimFailure {
            kappa,
            gamma,
            residual: f_norm,
            iters: max_iters,
        });
    }

    let cmd = Commands {
        elevator: u[2],
        aileron: u[3],
        rudder: u[4],
        throttle: u[5],
    };
    // Trim commands must leave saturation margin for the controller.
    for (value, sat) in [
        (cmd.elevator.abs(), params.sat[0]),
        (cmd.aileron.abs(), params.sat[1]),
        (cmd.rudder.abs(), params.sat[2]),
        (cmd.throttle.abs(), params.sat[3]),
    ] {
        if value >= sat {
            return Err(Error::TrimFailure {
                kappa,
                gamma,
                residual: f_norm,
                iters: max_iters,
            });
        }
    }
    let state = trim_state(u[0], u[1], &cmd, airspeed, gamma, psi_dot);
    Ok(TrimCondition {
        kappa,
        gamma,
        airspeed,
        v: state.v,
        phi: u[0],
        theta: u[1],
        omega: state.omega,
        commands: cmd,
        residual: f_norm,
    })
}

/// Precomputed trims for every (κ, γ) combination the path sampler can draw,
/// plus straight-and-level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrimTable {
    pub airspeed: f64,
    entries: Vec<TrimCondition>,
}

impl TrimTable {
    pub fn build(params: &AirframeParams, airspeed: f64) -> Result<Self> {
        let mut entries = vec![solve_trim(0.0, 0.0, airspeed, params)?];
        for &kappa in &KAPPA_SET {
            for &gamma in &GAMMA_SET {
                entries.push(solve_trim(kappa, gamma, airspeed, params)?);
            }
        }
        Ok(TrimTable { airspeed, entries })
    }

    pub fn lookup(&self, kappa: f64, gamma: f64) -> Option<&TrimCondition> {
        self.entries
            .iter()
            .find(|t| t.kappa == kappa && t.gamma == gamma)
    }

    pub fn straight_level(&self) -> &TrimCondition {
        &self.entries[0]
    }
}

/// One sampled point of a reference trajectory.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ReferenceStep {
    pub position: Vector3<f64>,
    /// Reference attitude (φ, θ, ψ), rad.
    pub attitude: Vector3<f64>,
    /// Reference body velocity, m/s.
    pub velocity: Vector3<f64>,
    /// Reference body rates, rad/s.
    pub omega: Vector3<f64>,
    /// Course angle (equals ψ for the wind-free reference), rad.
    pub course: f64,
    /// Segment parameters at this step.
    pub kappa: f64,
    pub gamma: f64,
    /// Reference (trim) command.
    pub commands: Commands,
    pub airspeed: f64,
}

/// Time-indexed reference trajectory sampled at the control step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReferencePath {
    pub dt: f64,
    pub steps: Vec<ReferenceStep>,
}

/// Pose chained between segments.
#[derive(Debug, Clone, Copy)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub heading: f64,
}

/// Closed-form propagation of one trim over `duration`, sampled at `dt`.
/// Returns the sampled steps and the end pose for chaining.
pub fn build_segment(
    trim: &TrimCondition,
    duration: f64,
    start: Pose,
    dt: f64,
) -> (Vec<ReferenceStep>, Pose) {
    let n = (duration / dt).round() as usize;
    let psi_dot = trim.psi_dot();
    let v_h = trim.airspeed * trim.gamma.cos();
    let v_z = -trim.airspeed * trim.gamma.sin();

    let pose_at = |t: f64| -> (Vector3<f64>, f64) {
        let psi = start.heading + psi_dot * t;
        let position = if psi_dot.abs() < 1e-12 {
            start.position
                + Vector3::new(
                    v_h * start.heading.cos() * t,
                    v_h * start.heading.sin() * t,
                    v_z * t,
                )
        } else {
            start.position
                + Vector3::new(
                    v_h / psi_dot * (psi.sin() - start.heading.sin()),
                    -v_h / psi_dot * (psi.cos() - start.heading.cos()),
                    v_z * t,
                )
        };
        (position, psi)
    };

    let mut steps = Vec::with_capacity(n);
    for k in 0..n {
        let (position, psi) = pose_at(k as f64 * dt);
        steps.push(ReferenceStep {
            position,
            attitude: Vector3::new(trim.phi, trim.theta, wrap_angle(psi)),
            velocity: trim.v,
            omega: trim.omega,
            course: wrap_angle(psi),
            kappa: trim.kappa,
            gamma: trim.gamma,
            commands: trim.commands,
            airspeed: trim.airspeed,
        });
    }
    let (end_position, end_heading) = pose_at(n as f64 * dt);
    (
        steps,
        Pose {
            position: end_position,
            heading: end_heading,
        },
    )
}

/// Concatenate pre-built segments into one path. Each segment must have been
/// built from the previous segment's end pose, which the path builder
/// guarantees.
pub fn concatenate_segments(dt: f64, segments: Vec<Vec<ReferenceStep>>) -> ReferencePath {
    let steps = segments.into_iter().flatten().collect();
    ReferencePath { dt, steps }
}

/// Random alternating straight and turning segments covering at least
/// `min_duration` seconds. Turns draw (κ, γ) from the reference sets; the
/// turn direction alternates to keep figures closed. Straight segments are
/// level.
pub fn sample_path<R: Rng>(
    rng: &mut R,
    trims: &TrimTable,
    start: Pose,
    min_duration: f64,
    dt: f64,
) -> ReferencePath {
    let mut segments = Vec::new();
    let mut pose = start;
    let mut total = 0.0;
    let mut turning = false;
    let mut last_turn_sign = if rng.random_range(0..2) == 0 { 1.0 } else { -1.0 };

    while total < min_duration {
        let duration = rng.random_range(5.0..15.0);
        let trim = if turning {
            last_turn_sign = -last_turn_sign;
            let magnitude = [0.012, 0.02][rng.random_range(0..2)];
            let kappa = last_turn_sign * magnitude;
            let gamma = GAMMA_SET[rng.random_range(0..GAMMA_SET.len())];
            *trims.lookup(kappa, gamma).expect("trim table covers the sets")
        } else {
            *trims.straight_level()
        };
        let (steps, end) = build_segment(&trim, duration, pose, dt);
        total += steps.len() as f64 * dt;
        segments.push(steps);
        pose = end;
        turning = !turning;
    }
    concatenate_segments(dt, segments)
}

/// Advance the reference index by projecting the aircraft position onto the
/// path within a forward window. The returned index never retreats and moves
/// at most `MAX_ADVANCE_STEPS` per call. Returns `(index, at_end)`.
pub fn advance_reference(path: &ReferencePath, p: Vector3<f64>, idx: usize) -> (usize, bool) {
    let last = path.steps.len() - 1;
    if idx >= last {
        return (last, true);
    }
    let hi = (idx + SEARCH_WINDOW_STEPS).min(last);
    let mut best = idx;
    let mut best_d = f64::INFINITY;
    for j in idx..=hi {
        let d = (p - path.steps[j].position).norm_squared();
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    let new_idx = best.min(idx + MAX_ADVANCE_STEPS).max(idx);
    (new_idx, new_idx >= last)
}

impl ReferencePath {
    /// Export one JSON record per step (reproducibility interface).
    pub fn to_jsonl<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        for step in &self.steps {
            serde_json::to_writer(&mut w, step)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn from_jsonl<Rd: std::io::BufRead>(r: Rd, dt: f64) -> Result<Self> {
        let mut steps = Vec::new();
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            steps.push(serde_json::from_str(&line)?);
        }
        Ok(ReferencePath { dt, steps })
    }
}
