//! Stochastic environment effects: steady wind, Dryden gusts, sensor noise,
//! command delay, and bounded aerodynamic coefficient perturbations.
//!
//! Every operation here draws from an explicitly passed RNG stream, so two
//! runs with equal seeds are bit-identical. Each environment instance owns
//! its own streams and filter states.

use nalgebra::Vector3;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dynamics::Commands;

/// Reference wind speed for the gust intensity model: 30 kt in m/s.
pub const DRYDEN_REF_WIND_MS: f64 = 30.0 * 0.514444;

const FT_PER_M: f64 = 1.0 / 0.3048;

/// Draw a horizontal steady wind with magnitude uniform in [3, 5] m/s and
/// heading uniform in [0, 2π).
pub fn sample_steady_wind<R: Rng>(rng: &mut R) -> Vector3<f64> {
    let magnitude = rng.random_range(3.0..5.0);
    let heading = rng.random_range(0.0..std::f64::consts::TAU);
    Vector3::new(magnitude * heading.cos(), magnitude * heading.sin(), 0.0)
}

/// Low-altitude Dryden turbulence shaping filters, discretized exactly under
/// a zero-order hold on the driving white noise.
///
/// Scale lengths and intensities follow the standard low-altitude forms with
/// a fixed 30 kt reference wind at 20 ft: σ_w = 0.1·W20,
/// σ_u = σ_v = σ_w/(0.177 + 0.000823 h)^0.4, L_w = h,
/// L_u = L_v = h/(0.177 + 0.000823 h)^1.2 (h in feet). The longitudinal
/// channel is a first-order filter; the lateral and vertical channels are
/// second-order. Filter poles use the nominal airspeed, and states are
/// initialized from the stationary distribution so output statistics hold
/// from the first step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DrydenModel {
    /// Output standard deviations per axis (u, v, w), m/s.
    pub sigma: [f64; 3],
    /// Scale lengths per axis, m.
    pub scale_m: [f64; 3],
    /// Airspeed used for the filter poles, m/s.
    pub airspeed: f64,
    /// Multiplier on the output (0 disables gusts).
    pub intensity: f64,
    state_u: f64,
    state_v: [f64; 2],
    state_w: [f64; 2],
}

impl DrydenModel {
    /// Build the filter set for a given altitude (m AGL) and airspeed, at the
    /// fixed 30 kt reference intensity.
    pub fn new(altitude_m: f64, airspeed: f64, intensity: f64) -> Self {
        let h_ft = (altitude_m.max(3.0)) * FT_PER_M;
        let denom = 0.177 + 0.000823 * h_ft;
        let sigma_w = 0.1 * DRYDEN_REF_WIND_MS;
        let sigma_uv = sigma_w / denom.powf(0.4);
        let l_w_m = h_ft / FT_PER_M;
        let l_uv_m = (h_ft / denom.powf(1.2)) / FT_PER_M;
        DrydenModel {
            sigma: [sigma_uv, sigma_uv, sigma_w],
            scale_m: [l_uv_m, l_uv_m, l_w_m],
            airspeed,
            intensity,
            state_u: 0.0,
            state_v: [0.0; 2],
            state_w: [0.0; 2],
        }
    }

    /// Sample the internal states from their stationary distribution.
    pub fn init_stationary<R: Rng>(&mut self, rng: &mut R) {
        let n: f64 = rng.sample(StandardNormal);
        self.state_u = n; // unit stationary variance by construction
        for (states, axis) in [(&mut self.state_v, 1usize), (&mut self.state_w, 2usize)] {
            let a = self.airspeed / self.scale_m[axis];
            let n1: f64 = rng.sample(StandardNormal);
            let n2: f64 = rng.sample(StandardNormal);
            states[0] = n1 * (std::f64::consts::PI / (4.0 * a * a * a)).sqrt();
            states[1] = n2 * (std::f64::consts::PI / (4.0 * a)).sqrt();
        }
    }

    /// Advance all three filters by `dt` and return the gust velocity vector
    /// (treated as NED components), m/s.
    pub fn step<R: Rng>(&mut self, dt: f64, rng: &mut R) -> Vector3<f64> {
        // Longitudinal: ẋ = −a x + √(2a) w, output σ_u x, unit state variance.
        let a = self.airspeed / self.scale_m[0];
        let f = (-a * dt).exp();
        let q = (1.0 - f * f).max(0.0);
        let n: f64 = rng.sample(StandardNormal);
        self.state_u = f * self.state_u + n * q.sqrt();
        let gust_u = self.sigma[0] * self.state_u;

        let mut out = [gust_u, 0.0, 0.0];
        for (states, axis) in [(&mut self.state_v, 1usize), (&mut self.state_w, 2usize)] {
            let a = self.airspeed / self.scale_m[axis];
            let g = self.sigma[axis] * (self.scale_m[axis] / (std::f64::consts::PI * self.airspeed)).sqrt();

            // Exact matrix exponential for A = [[0, 1], [−a², −2a]] (repeated pole).
            let e = (-a * dt).exp();
            let phi11 = e * (1.0 + a * dt);
            let phi12 = e * dt;
            let phi21 = -e * a * a * dt;
            let phi22 = e * (1.0 - a * dt);

            // Exact process-noise covariance over one step for B = [0, √π].
            let e2 = (-2.0 * a * dt).exp();
            let i0 = (1.0 - e2) / (2.0 * a);
            let i1 = (1.0 - e2 * (2.0 * a * dt + 1.0)) / (4.0 * a * a);
            let i2 = (1.0 - e2 * (2.0 * a * a * dt * dt + 2.0 * a * dt + 1.0)) / (4.0 * a * a * a);
            let pi = std::f64::consts::PI;
            let q11 = pi * i2;
            let q12 = pi * (i1 - a * i2);
            let q22 = pi * (i0 - 2.0 * a * i1 + a * a * i2);

            // Cholesky factor of the 2×2 covariance.
            let l11 = q11.max(0.0).sqrt();
            let (l21, l22) = if l11 > 0.0 {
                let l21 = q12 / l11;
                (l21, (q22 - l21 * l21).max(0.0).sqrt())
            } else {
                (0.0, q22.max(0.0).sqrt())
            };

            let n1: f64 = rng.sample(StandardNormal);
            let n2: f64 = rng.sample(StandardNormal);
            let x1 = phi11 * states[0] + phi12 * states[1] + l11 * n1;
            let x2 = phi21 * states[0] + phi22 * states[1] + l21 * n1 + l22 * n2;
            states[0] = x1;
            states[1] = x2;
            out[axis] = g * (a * a * x1 + 3.0_f64.sqrt() * a * x2);
        }

        self.intensity * Vector3::new(out[0], out[1], out[2])
    }

    /// Analytic stationary output variance per axis (at unit intensity).
    pub fn analytic_variance(&self) -> [f64; 3] {
        [
            self.sigma[0] * self.sigma[0],
            self.sigma[1] * self.sigma[1],
            self.sigma[2] * self.sigma[2],
        ]
    }
}

/// Steady wind plus Dryden gusts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindModel {
    pub steady: Vector3<f64>,
    pub dryden: DrydenModel,
}

impl WindModel {
    pub fn calm(airspeed: f64) -> Self {
        WindModel {
            steady: Vector3::zeros(),
            dryden: DrydenModel::new(100.0, airspeed, 0.0),
        }
    }

    /// Total inertial wind after advancing the gust filters one step.
    pub fn step<R: Rng>(&mut self, dt: f64, rng: &mut R) -> Vector3<f64> {
        self.steady + self.dryden.step(dt, rng)
    }
}

/// Per-channel Gaussian measurement noise standard deviations.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorNoiseSpec {
    /// Body rates, rad/s.
    pub sd_omega: f64,
    /// Airspeed, m/s.
    pub sd_airspeed: f64,
    /// Roll and pitch, rad.
    pub sd_roll_pitch: f64,
    /// Yaw, rad.
    pub sd_yaw: f64,
    /// Course angle, rad.
    pub sd_course: f64,
    /// Horizontal position, m.
    pub sd_xy: f64,
    /// Vertical position, m.
    pub sd_z: f64,
    /// Translational acceleration, m/s².
    pub sd_accel: f64,
}

impl Default for SensorNoiseSpec {
    fn default() -> Self {
        SensorNoiseSpec {
            sd_omega: 0.01,
            sd_airspeed: 2.0,
            sd_roll_pitch: 0.01,
            sd_yaw: 0.1,
            sd_course: 0.02,
            sd_xy: 0.03,
            sd_z: 0.01,
            sd_accel: 0.03,
        }
    }
}

impl SensorNoiseSpec {
    pub fn zero() -> Self {
        SensorNoiseSpec {
            sd_omega: 0.0,
            sd_airspeed: 0.0,
            sd_roll_pitch: 0.0,
            sd_yaw: 0.0,
            sd_course: 0.0,
            sd_xy: 0.0,
            sd_z: 0.0,
            sd_accel: 0.0,
        }
    }
}

/// Sensor channels available on the vehicle: body rates, airspeed, attitude,
/// inertial position, translational acceleration, and course angle.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Measurement {
    pub omega: Vector3<f64>,
    pub airspeed: f64,
    pub attitude: Vector3<f64>,
    pub position: Vector3<f64>,
    pub accel: Vector3<f64>,
    pub course: f64,
}

/// Add independent zero-mean Gaussian noise per channel. Course noise is
/// applied to the angle itself; trig encoding happens downstream.
pub fn apply_sensor_noise<R: Rng>(
    m: &Measurement,
    spec: &SensorNoiseSpec,
    rng: &mut R,
) -> Measurement {
    let mut n = |sd: f64| -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        sd * z
    };
    Measurement {
        omega: m.omega + Vector3::new(n(spec.sd_omega), n(spec.sd_omega), n(spec.sd_omega)),
        airspeed: m.airspeed + n(spec.sd_airspeed),
        attitude: m.attitude
            + Vector3::new(n(spec.sd_roll_pitch), n(spec.sd_roll_pitch), n(spec.sd_yaw)),
        position: m.position + Vector3::new(n(spec.sd_xy), n(spec.sd_xy), n(spec.sd_z)),
        accel: m.accel + Vector3::new(n(spec.sd_accel), n(spec.sd_accel), n(spec.sd_accel)),
        course: m.course + n(spec.sd_course),
    }
}

/// Bounded random-walk perturbation of the six aerodynamic coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffPerturbation {
    pub delta: [f64; 6],
    /// Magnitude bound per channel.
    pub mag: [f64; 6],
    /// Per-step rate bound per channel.
    pub rate: [f64; 6],
}

impl CoeffPerturbation {
    pub fn disabled() -> Self {
        CoeffPerturbation {
            delta: [0.0; 6],
            mag: [0.0; 6],
            rate: [0.0; 6],
        }
    }

    /// Bounds from nominal coefficient values: magnitude 10% of each
    /// trim-level coefficient magnitude (floor 0.01), rate = magnitude / 25.
    pub fn from_trim_coeffs(trim_coeffs: &[f64; 6]) -> Self {
        let mut mag = [0.0; 6];
        let mut rate = [0.0; 6];
        for i in 0..6 {
            mag[i] = (0.1 * trim_coeffs[i].abs()).max(0.01);
            rate[i] = mag[i] / 25.0;
        }
        CoeffPerturbation {
            delta: [0.0; 6],
            mag,
            rate,
        }
    }

    /// One random-walk update: each channel moves by a uniform draw within
    /// its rate bound, then is clipped to its magnitude bound.
    pub fn step<R: Rng>(&mut self, rng: &mut R) -> [f64; 6] {
        for i in 0..6 {
            if self.rate[i] > 0.0 {
                let d = rng.random_range(-self.rate[i]..=self.rate[i]);
                self.delta[i] = (self.delta[i] + d).clamp(-self.mag[i], self.mag[i]);
            }
        }
        self.delta
    }
}

/// Fixed per-episode command delay of zero or one control step. With a one
/// step delay, the first step applies the supplied reference command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CommandDelay {
    pub delay_steps: usize,
    pending: Option<Commands>,
}

impl CommandDelay {
    pub fn new(delay_steps: usize) -> Self {
        assert!(delay_steps <= 1, "delay is at most one simulation step");
        CommandDelay {
            delay_steps,
            pending: None,
        }
    }

    pub fn apply(&mut self, cmd: Commands, reference: Commands) -> Commands {
        if self.delay_steps == 0 {
            return cmd;
        }
        let out = self.pending.unwrap_or(reference);
        self.pending = Some(cmd);
        out
    }
}
