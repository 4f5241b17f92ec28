//! Failure parameterization and scenario sampling.
//!
//! Faults are stuck surfaces on the right aileron, left aileron, or rudder:
//! a binary fail flag plus a stuck level expressed as a fraction of the
//! upper saturation limit. Training draws levels from a coarse grid;
//! evaluation adds interpolated levels and a nonstationary "flutter" mode
//! where the stuck level wanders piecewise-constantly around a center value.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Stuck levels used when sampling training scenarios.
pub const LAMBDA_TRAIN: [f64; 5] = [0.0, 0.25, -0.25, 0.5, -0.5];

/// Extended stuck levels used by the evaluation protocols.
pub const LAMBDA_EVAL: [f64; 9] = [
    0.0, 0.125, -0.125, 0.25, -0.25, 0.375, -0.375, 0.5, -0.5,
];

/// Flutter excursion half-width around the center level.
pub const FLUTTER_EXCURSION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActuatorId {
    RightAileron,
    LeftAileron,
    Rudder,
}

impl ActuatorId {
    pub const ALL: [ActuatorId; 3] = [
        ActuatorId::RightAileron,
        ActuatorId::LeftAileron,
        ActuatorId::Rudder,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            ActuatorId::RightAileron => "right_aileron",
            ActuatorId::LeftAileron => "left_aileron",
            ActuatorId::Rudder => "rudder",
        }
    }
}

/// One actuator's failure channel: fail flag and stuck level in [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelFailure {
    pub failed: bool,
    pub level: f64,
}

impl ChannelFailure {
    pub fn healthy() -> Self {
        ChannelFailure {
            failed: false,
            level: 0.0,
        }
    }
}

/// The six-element failure vector λ, packed as
/// [A_r fail, A_r val, A_l fail, A_l val, R fail, R val].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureVector {
    pub right_aileron: ChannelFailure,
    pub left_aileron: ChannelFailure,
    pub rudder: ChannelFailure,
}

impl FailureVector {
    pub fn nominal() -> Self {
        FailureVector {
            right_aileron: ChannelFailure::healthy(),
            left_aileron: ChannelFailure::healthy(),
            rudder: ChannelFailure::healthy(),
        }
    }

    pub fn stuck(actuator: ActuatorId, level: f64) -> Self {
        let mut v = FailureVector::nominal();
        let ch = ChannelFailure {
            failed: true,
            level,
        };
        match actuator {
            ActuatorId::RightAileron => v.right_aileron = ch,
            ActuatorId::LeftAileron => v.left_aileron = ch,
            ActuatorId::Rudder => v.rudder = ch,
        }
        v
    }

    /// Packed vector. Levels are reported as zero on healthy channels.
    pub fn to_array(&self) -> [f64; 6] {
        let pack = |c: &ChannelFailure| -> (f64, f64) {
            if c.failed {
                (1.0, c.level)
            } else {
                (0.0, 0.0)
            }
        };
        let (arf, arv) = pack(&self.right_aileron);
        let (alf, alv) = pack(&self.left_aileron);
        let (rf, rv) = pack(&self.rudder);
        [arf, arv, alf, alv, rf, rv]
    }
}

/// A fully specified episode failure scenario. Flutter scenarios carry their
/// hold schedule so the per-step signal is a pure lookup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ScenarioSpec {
    Nominal,
    StuckFullEpisode {
        actuator: ActuatorId,
        level: f64,
    },
    StuckAtOnset {
        actuator: ActuatorId,
        level: f64,
        onset_step: usize,
    },
    Flutter {
        actuator: ActuatorId,
        center: f64,
        onset_step: usize,
        duration_steps: usize,
        /// (start_step, level) holds covering the flutter window.
        holds: Vec<(usize, f64)>,
    },
}

impl ScenarioSpec {
    /// Failure vector active at step `k`.
    pub fn lambda_at(&self, k: usize) -> FailureVector {
        match self {
            ScenarioSpec::Nominal => FailureVector::nominal(),
            ScenarioSpec::StuckFullEpisode { actuator, level } => {
                FailureVector::stuck(*actuator, *level)
            }
            ScenarioSpec::StuckAtOnset {
                actuator,
                level,
                onset_step,
            } => {
                if k >= *onset_step {
                    FailureVector::stuck(*actuator, *level)
                } else {
                    FailureVector::nominal()
                }
            }
            ScenarioSpec::Flutter {
                actuator,
                onset_step,
                duration_steps,
                holds,
                ..
            } => {
                if k < *onset_step || k >= onset_step + duration_steps {
                    return FailureVector::nominal();
                }
                let mut level = holds.first().map(|h| h.1).unwrap_or(0.0);
                for &(start, value) in holds {
                    if start <= k {
                        level = value;
                    } else {
                        break;
                    }
                }
                FailureVector::stuck(*actuator, level)
            }
        }
    }

    pub fn actuator(&self) -> Option<ActuatorId> {
        match self {
            ScenarioSpec::Nominal => None,
            ScenarioSpec::StuckFullEpisode { actuator, .. }
            | ScenarioSpec::StuckAtOnset { actuator, .. }
            | ScenarioSpec::Flutter { actuator, .. } => Some(*actuator),
        }
    }

    pub fn level(&self) -> Option<f64> {
        match self {
            ScenarioSpec::Nominal => None,
            ScenarioSpec::StuckFullEpisode { level, .. }
            | ScenarioSpec::StuckAtOnset { level, .. } => Some(*level),
            ScenarioSpec::Flutter { center, .. } => Some(*center),
        }
    }
}

/// Mixture weights for training scenario kinds.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioMix {
    pub nominal: f64,
    pub stuck_full: f64,
    pub stuck_onset: f64,
}

impl Default for ScenarioMix {
    fn default() -> Self {
        ScenarioMix {
            nominal: 1.0,
            stuck_full: 1.0,
            stuck_onset: 1.0,
        }
    }
}

fn sample_actuator<R: Rng>(rng: &mut R) -> ActuatorId {
    ActuatorId::ALL[rng.random_range(0..3)]
}

fn sample_onset<R: Rng>(rng: &mut R, horizon_steps: usize) -> usize {
    // Uniform over the episode interior.
    rng.random_range(1..horizon_steps.max(2))
}

/// Draw a training scenario from the configured mixture: nominal, stuck for
/// the whole episode, or stuck from a random onset step. Levels come from
/// the training grid.
pub fn sample_training_scenario<R: Rng>(
    rng: &mut R,
    mix: &ScenarioMix,
    horizon_steps: usize,
) -> ScenarioSpec {
    let total = mix.nominal + mix.stuck_full + mix.stuck_onset;
    let x = rng.random_range(0.0..total);
    if x < mix.nominal {
        ScenarioSpec::Nominal
    } else if x < mix.nominal + mix.stuck_full {
        ScenarioSpec::StuckFullEpisode {
            actuator: sample_actuator(rng),
            level: LAMBDA_TRAIN[rng.random_range(0..LAMBDA_TRAIN.len())],
        }
    } else {
        ScenarioSpec::StuckAtOnset {
            actuator: sample_actuator(rng),
            level: LAMBDA_TRAIN[rng.random_range(0..LAMBDA_TRAIN.len())],
            onset_step: sample_onset(rng, horizon_steps),
        }
    }
}

/// Evaluation protocol: persistent stuck failure at a random onset with a
/// level from the extended grid.
pub fn sample_static_eval_scenario<R: Rng>(rng: &mut R, horizon_steps: usize) -> ScenarioSpec {
    ScenarioSpec::StuckAtOnset {
        actuator: sample_actuator(rng),
        level: LAMBDA_EVAL[rng.random_range(0..LAMBDA_EVAL.len())],
        onset_step: sample_onset(rng, horizon_steps),
    }
}

/// Evaluation protocol: flutter failure. Duration 1–10 s, values held
/// 0.2–1.0 s, each drawn uniformly within ±0.2 of the center level
/// (intersected with [-1, 1]).
pub fn sample_flutter_scenario<R: Rng>(
    rng: &mut R,
    dt: f64,
    horizon_steps: usize,
) -> ScenarioSpec {
    let actuator = sample_actuator(rng);
    let center = LAMBDA_EVAL[rng.random_range(0..LAMBDA_EVAL.len())];
    let duration_steps = rng.random_range((1.0 / dt).round() as usize..=(10.0 / dt).round() as usize);
    let onset_step = sample_onset(rng, horizon_steps);
    let lo = (center - FLUTTER_EXCURSION).max(-1.0);
    let hi = (center + FLUTTER_EXCURSION).min(1.0);
    let hold_min = (0.2 / dt).round() as usize;
    let hold_max = (1.0 / dt).round() as usize;

    let mut holds = Vec::new();
    let mut t = onset_step;
    while t < onset_step + duration_steps {
        holds.push((t, rng.random_range(lo..=hi)));
        t += rng.random_range(hold_min..=hold_max);
    }
    ScenarioSpec::Flutter {
        actuator,
        center,
        onset_step,
        duration_steps,
        holds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn packed_order_and_healthy_levels() {
        let v = FailureVector::stuck(ActuatorId::LeftAileron, -0.5);
        assert_eq!(v.to_array(), [0.0, 0.0, 1.0, -0.5, 0.0, 0.0]);
        let mut v = FailureVector::nominal();
        v.rudder.level = 0.7; // not failed: reported as zero
        assert_eq!(v.to_array(), [0.0; 6]);
    }

    #[test]
    fn training_levels_stay_on_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mix = ScenarioMix::default();
        for _ in 0..10_000 {
            let s = sample_training_scenario(&mut rng, &mix, 750);
            if let Some(level) = s.level() {
                assert!(LAMBDA_TRAIN.contains(&level), "level {level}");
            }
        }
    }

    #[test]
    fn stuck_full_episode_fails_from_step_zero() {
        let s = ScenarioSpec::StuckFullEpisode {
            actuator: ActuatorId::Rudder,
            level: 0.25,
        };
        assert_eq!(s.lambda_at(0).to_array()[4], 1.0);
        assert_eq!(s.lambda_at(500).to_array()[5], 0.25);
    }

    #[test]
    fn onset_scenario_flips_exactly_at_onset() {
        let s = ScenarioSpec::StuckAtOnset {
            actuator: ActuatorId::RightAileron,
            level: -0.25,
            onset_step: 100,
        };
        assert_eq!(s.lambda_at(99), FailureVector::nominal());
        assert_eq!(s.lambda_at(100).to_array(), [1.0, -0.25, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(s.lambda_at(700).to_array(), [1.0, -0.25, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn flutter_respects_window_excursion_and_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let s = sample_flutter_scenario(&mut rng, 0.04, 750);
            if let ScenarioSpec::Flutter {
                center,
                onset_step,
                duration_steps,
                ref holds,
                ..
            } = s
            {
                assert!((25..=250).contains(&duration_steps));
                assert_eq!(s.lambda_at(onset_step - 1), FailureVector::nominal());
                assert_eq!(
                    s.lambda_at(onset_step + duration_steps),
                    FailureVector::nominal()
                );
                // Every full hold lasts 5..=25 steps; the last may be cut by
                // the window end.
                for w in holds.windows(2) {
                    let len = w[1].0 - w[0].0;
                    assert!((5..=25).contains(&len), "hold length {len}");
                }
                for k in onset_step..onset_step + duration_steps {
                    let arr = s.lambda_at(k).to_array();
                    let (fail, val) = match s.actuator().unwrap() {
                        ActuatorId::RightAileron => (arr[0], arr[1]),
                        ActuatorId::LeftAileron => (arr[2], arr[3]),
                        ActuatorId::Rudder => (arr[4], arr[5]),
                    };
                    assert_eq!(fail, 1.0);
                    assert!((val - center).abs() <= FLUTTER_EXCURSION + 1e-12);
                    assert!((-1.0..=1.0).contains(&val));
                }
            } else {
                panic!("expected flutter scenario");
            }
        }
    }

    #[test]
    fn eval_levels_come_from_extended_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5000 {
            let s = sample_static_eval_scenario(&mut rng, 750);
            assert!(LAMBDA_EVAL.contains(&s.level().unwrap()));
        }
    }
}
