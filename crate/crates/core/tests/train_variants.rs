//! Short training runs for every architecture variant through the full
//! disturbance and failure mixture: the collector must auto-reset terminated
//! episodes, updates must stay finite, and checkpoints must reload.

use faultwing::dynamics::AirframeParams;
use faultwing::env::EnvConfig;
use faultwing::nets::{ArchTag, Checkpoint, NetShape};
use faultwing::ppo::{train, PpoConfig};

#[test]
fn every_architecture_trains_through_the_failure_mixture() {
    let ppo = PpoConfig {
        n_envs: 2,
        n_steps: 96,
        iterations: 2,
        epochs: 2,
        minibatch_size: 48,
        ..Default::default()
    };
    let env_config = EnvConfig {
        horizon_steps: 300,
        ..Default::default() // all disturbances and the scenario mixture on
    };
    for arch in [
        ArchTag::Mlp,
        ArchTag::Film { hc: false },
        ArchTag::Film { hc: true },
        ArchTag::Lora { rank: 8, hc: false },
        ArchTag::Lora { rank: 8, hc: true },
    ] {
        let dir = std::env::temp_dir().join(format!(
            "faultwing_variant_{}",
            arch.label().replace(['(', ')', '+'], "_")
        ));
        let _ = std::fs::remove_dir_all(&dir);
        let outcome = train(
            arch,
            NetShape::default(),
            AirframeParams::default_3kg(),
            env_config.clone(),
            ppo.clone(),
            31,
            &dir,
            None,
        )
        .unwrap_or_else(|e| panic!("{}: {e}", arch.label()));
        let ckpt = Checkpoint::load(&outcome.final_checkpoint).unwrap();
        assert_eq!(ckpt.params.arch, arch);
        assert!(ckpt.params.flatten().iter().all(|x| x.is_finite()));
        let log = std::fs::read_to_string(dir.join("train_log.csv")).unwrap();
        assert_eq!(log.lines().count(), 3, "{}", arch.label());
    }
}
