//! Run configuration and the airframe parameter file.
//!
//! The airframe file is a flat key-value TOML document (schema below); the
//! run config is a TOML file with sections for PPO, the environment, and
//! evaluation. Unknown keys are rejected in both. Every run writes a
//! resolved copy of its configuration for provenance.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{AeroCoeffs, AirframeParams};
use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::nets::policy::ArchTag;
use crate::ppo::PpoConfig;

/// Flat airframe parameter file. All keys are required; units follow the
/// field names (SI, angles rad, throttle rev/s).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AirframeFile {
    pub mass: f64,
    pub gravity: f64,
    pub j_xx: f64,
    pub j_yy: f64,
    pub j_zz: f64,
    pub j_xz: f64,
    pub chord: f64,
    pub span: f64,
    pub area: f64,
    pub d_prop: f64,
    pub rho: f64,

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
    /// Pitching moment per differential aileron deflection. Fixed default
    /// -0.02 unless overridden here.
    #[serde(default = "default_c_m_delta_a_diff")]
    pub c_m_delta_a_diff: f64,

    pub tau_elevator: f64,
    pub tau_aileron: f64,
    pub tau_rudder: f64,
    pub tau_throttle: f64,
    pub sat_elevator: f64,
    pub sat_aileron: f64,
    pub sat_rudder: f64,
    pub sat_throttle: f64,
}

fn default_c_m_delta_a_diff() -> f64 {
    -0.02
}

impl AirframeFile {
    pub fn to_params(&self) -> AirframeParams {
        AirframeParams {
            mass: self.mass,
            gravity: self.gravity,
            j_xx: self.j_xx,
            j_yy: self.j_yy,
            j_zz: self.j_zz,
            j_xz: self.j_xz,
            chord: self.chord,
            span: self.span,
            area: self.area,
            d_prop: self.d_prop,
            rho: self.rho,
            coeffs: AeroCoeffs {
                c_lift_0: self.c_lift_0,
                c_lift_alpha: self.c_lift_alpha,
                c_lift_q: self.c_lift_q,
                c_lift_delta_e: self.c_lift_delta_e,
                c_drag_0: self.c_drag_0,
                c_drag_k: self.c_drag_k,
                c_y_beta: self.c_y_beta,
                c_y_p: self.c_y_p,
                c_y_r: self.c_y_r,
                c_y_delta_a: self.c_y_delta_a,
                c_y_delta_r: self.c_y_delta_r,
                c_l_beta: self.c_l_beta,
                c_l_p: self.c_l_p,
                c_l_r: self.c_l_r,
                c_l_delta_a: self.c_l_delta_a,
                c_l_delta_r: self.c_l_delta_r,
                c_m_0: self.c_m_0,
                c_m_alpha: self.c_m_alpha,
                c_m_q: self.c_m_q,
                c_m_delta_e: self.c_m_delta_e,
                c_n_beta: self.c_n_beta,
                c_n_p: self.c_n_p,
                c_n_r: self.c_n_r,
                c_n_delta_a: self.c_n_delta_a,
                c_n_delta_r: self.c_n_delta_r,
                c_x_j1: self.c_x_j1,
                c_x_j2: self.c_x_j2,
            },
            c_m_delta_a_diff: self.c_m_delta_a_diff,
            tau: [
                self.tau_elevator,
                self.tau_aileron,
                self.tau_rudder,
                self.tau_throttle,
            ],
            sat: [
                self.sat_elevator,
                self.sat_aileron,
                self.sat_rudder,
                self.sat_throttle,
            ],
        }
    }

    pub fn from_params(p: &AirframeParams) -> Self {
        AirframeFile {
            mass: p.mass,
            gravity: p.gravity,
            j_xx: p.j_xx,
            j_yy: p.j_yy,
            j_zz: p.j_zz,
            j_xz: p.j_xz,
            chord: p.chord,
            span: p.span,
            area: p.area,
            d_prop: p.d_prop,
            rho: p.rho,
            c_lift_0: p.coeffs.c_lift_0,
            c_lift_alpha: p.coeffs.c_lift_alpha,
            c_lift_q: p.coeffs.c_lift_q,
            c_lift_delta_e: p.coeffs.c_lift_delta_e,
            c_drag_0: p.coeffs.c_drag_0,
            c_drag_k: p.coeffs.c_drag_k,
            c_y_beta: p.coeffs.c_y_beta,
            c_y_p: p.coeffs.c_y_p,
            c_y_r: p.coeffs.c_y_r,
            c_y_delta_a: p.coeffs.c_y_delta_a,
            c_y_delta_r: p.coeffs.c_y_delta_r,
            c_l_beta: p.coeffs.c_l_beta,
            c_l_p: p.coeffs.c_l_p,
            c_l_r: p.coeffs.c_l_r,
            c_l_delta_a: p.coeffs.c_l_delta_a,
            c_l_delta_r: p.coeffs.c_l_delta_r,
            c_m_0: p.coeffs.c_m_0,
            c_m_alpha: p.coeffs.c_m_alpha,
            c_m_q: p.coeffs.c_m_q,
            c_m_delta_e: p.coeffs.c_m_delta_e,
            c_n_beta: p.coeffs.c_n_beta,
            c_n_p: p.coeffs.c_n_p,
            c_n_r: p.coeffs.c_n_r,
            c_n_delta_a: p.coeffs.c_n_delta_a,
            c_n_delta_r: p.coeffs.c_n_delta_r,
            c_x_j1: p.coeffs.c_x_j1,
            c_x_j2: p.coeffs.c_x_j2,
            c_m_delta_a_diff: p.c_m_delta_a_diff,
            tau_elevator: p.tau[0],
            tau_aileron: p.tau[1],
            tau_rudder: p.tau[2],
            tau_throttle: p.tau[3],
            sat_elevator: p.sat[0],
            sat_aileron: p.sat[1],
            sat_rudder: p.sat[2],
            sat_throttle: p.sat[3],
        }
    }
}

/// Load and validate an airframe file.
pub fn load_airframe(path: &Path) -> Result<AirframeParams> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Config(format!("cannot read airframe file {}: {e}", path.display()))
    })?;
    let file: AirframeFile = toml::from_str(&text)?;
    let params = file.to_params();
    params.validate()?;
    Ok(params)
}

/// Evaluation section of the run config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub episodes: usize,
    /// Retain per-episode logs (large).
    pub keep_logs: bool,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            episodes: 1000,
            keep_logs: false,
        }
    }
}

/// Top-level run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Path to the airframe parameter file (relative paths resolve against
    /// the config file location).
    pub airframe: PathBuf,
    /// Architecture tag: mlp, film, film_hc, lora<rank>, lora<rank>_hc.
    pub arch: String,
    #[serde(default)]
    pub seed: u64,
    pub out_dir: PathBuf,
    #[serde(default)]
    pub ppo: PpoConfig,
    #[serde(default)]
    pub env: EnvConfig,
    #[serde(default)]
    pub eval: EvalSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig = toml::from_str(&text)?;
        // Resolve the airframe path against the config directory.
        if cfg.airframe.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.airframe = dir.join(&cfg.airframe);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.arch_tag()?;
        self.ppo.validate()?;
        if self.env.dt <= 0.0 || self.env.horizon_steps == 0 {
            return Err(Error::Config("env.dt and env.horizon_steps must be positive".into()));
        }
        Ok(())
    }

    pub fn arch_tag(&self) -> Result<ArchTag> {
        ArchTag::parse(&self.arch)
    }

    /// Serialize the resolved configuration (provenance copy).
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(format!("serialize config: {e}")))
    }
}
