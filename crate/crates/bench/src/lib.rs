//! Shared fixtures for the benchmark targets.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use faultwing::dynamics::AirframeParams;
use faultwing::env::{DisturbanceConfig, Env, EnvConfig, ScenarioSpec};
use faultwing::nets::{ArchTag, NetShape, PolicyParams};
use faultwing::reference::{TrimTable, V_NOM};

pub fn airframe() -> AirframeParams {
    AirframeParams::default_3kg()
}

pub fn trim_table() -> Arc<TrimTable> {
    Arc::new(TrimTable::build(&airframe(), V_NOM).expect("trim table"))
}

/// Environment with all disturbances active, reset on a nominal scenario.
pub fn ready_env(seed: u64) -> Env {
    let mut env = Env::new(airframe(), trim_table(), EnvConfig::default(), seed).expect("env");
    env.reset_with_scenario(ScenarioSpec::Nominal).expect("reset");
    env
}

/// Environment with disturbances off (pure dynamics path).
pub fn quiet_env(seed: u64) -> Env {
    let config = EnvConfig {
        disturbances: DisturbanceConfig::all_off(),
        ..Default::default()
    };
    let mut env = Env::new(airframe(), trim_table(), config, seed).expect("env");
    env.reset_with_scenario(ScenarioSpec::Nominal).expect("reset");
    env
}

pub fn policy(arch: ArchTag, seed: u64) -> PolicyParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PolicyParams::init(arch, NetShape::default(), &mut rng)
}
