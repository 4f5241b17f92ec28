//! Episode logs: one JSON-lines record per control step, sufficient to
//! recompute metrics and replay an episode offline.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::dynamics::{AircraftState, Commands};
use crate::env::reward::RewardBreakdown;
use crate::env::{Observation, TerminationCause};
use crate::error::Result;

/// Reference quantities logged per step.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ReferenceRecord {
    pub position: Vector3<f64>,
    pub attitude: Vector3<f64>,
    pub course: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub commands: Commands,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub state: AircraftState,
    pub reference: ReferenceRecord,
    pub observation: Observation,
    pub action: [f64; 4],
    pub command: Commands,
    pub reward: RewardBreakdown,
    pub lambda: [f64; 6],
    pub termination: Option<TerminationCause>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub records: Vec<StepRecord>,
}

impl EpisodeLog {
    pub fn total_reward(&self) -> f64 {
        self.records.iter().map(|r| r.reward.total).sum()
    }

    pub fn termination(&self) -> Option<TerminationCause> {
        self.records.last().and_then(|r| r.termination)
    }

    /// Position error ‖p − p_ref‖ per step.
    pub fn position_errors(&self) -> Vec<f64> {
        self.records
            .iter()
            .map(|r| (r.state.p - r.reference.position).norm())
            .collect()
    }

    pub fn to_jsonl<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        for rec in &self.records {
            serde_json::to_writer(&mut w, rec)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn from_jsonl<R: std::io::BufRead>(r: R) -> Result<Self> {
        let mut records = Vec::new();
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            records.push(serde_json::from_str(&line)?);
        }
        Ok(EpisodeLog { records })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Actuators;

    fn record(step: usize, reward: f64) -> StepRecord {
        StepRecord {
            step,
            t: step as f64 * 0.04,
            state: AircraftState {
                p: Vector3::new(step as f64, 0.0, -100.0),
                v: Vector3::new(21.0, 0.0, 0.0),
                theta: Vector3::zeros(),
                omega: Vector3::zeros(),
                delta: Actuators::zero(),
            },
            reference: ReferenceRecord {
                position: Vector3::new(step as f64 + 1.0, 0.0, -100.0),
                attitude: Vector3::zeros(),
                course: 0.0,
                kappa: 0.0,
                gamma: 0.0,
                commands: Commands::from_array([0.0, 0.0, 0.0, 100.0]),
            },
            observation: Observation {
                state: vec![0.0; 34],
                lambda: [0.0; 6],
            },
            action: [0.0; 4],
            command: Commands::from_array([0.0; 4]),
            reward: RewardBreakdown {
                tracking: reward,
                banded: None,
                barrier: 0.0,
                rate_penalty: 0.0,
                total: reward,
            },
            lambda: [0.0; 6],
            termination: None,
        }
    }

    #[test]
    fn jsonl_roundtrip_preserves_statistics() {
        let log = EpisodeLog {
            records: (0..10).map(|k| record(k, 2.4)).collect(),
        };
        let mut buf = Vec::new();
        log.to_jsonl(&mut buf).unwrap();
        let back = EpisodeLog::from_jsonl(std::io::BufReader::new(&buf[..])).unwrap();
        assert_eq!(back.records.len(), 10);
        assert_eq!(back.total_reward(), log.total_reward());
        assert_eq!(back.position_errors(), log.position_errors());
    }
}
