//! Training loop: parallel rollout collection, GAE, updates, deterministic
//! logging, and resumable checkpoints.
//!
//! Each environment worker owns an environment instance, an action-sampling
//! RNG stream, and the current observation. Workers run independently (fan
//! out with rayon) and their rollouts are concatenated in env-index order,
//! so results do not depend on thread scheduling.

use std::fs::OpenOptions;
use std::io::Write as IoWrite;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::AirframeParams;
use crate::env::{Env, EnvConfig, EnvSnapshot, Observation, ScenarioSpec};
use crate::error::{Error, Result};
use crate::eval::episode_metrics;
use crate::nets::checkpoint::{Checkpoint, CHECKPOINT_VERSION};
use crate::nets::policy::{forward_full, sample_action, ArchTag, NetShape, PolicyParams};
use crate::ppo::{compute_gae, ppo_update, Adam, PpoConfig, RolloutBuffer, Sample};
use crate::reference::TrimTable;

/// One environment plus its per-env streams.
pub struct EnvWorker {
    pub env: Env,
    pub action_rng: ChaCha8Rng,
    pub obs: Observation,
    pub pending_return: f64,
}

/// Serializable training state for exact resume.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainResume {
    pub iteration: usize,
    pub adam: Adam,
    pub shuffle_rng: ChaCha8Rng,
    pub env_snapshots: Vec<EnvSnapshot>,
    pub action_rngs: Vec<ChaCha8Rng>,
    pub observations: Vec<Observation>,
    pub pending_returns: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub final_checkpoint: PathBuf,
    pub iterations_run: usize,
    pub first_iteration_reward: Option<f64>,
    pub last_iteration_reward: Option<f64>,
}

struct EnvRollout {
    samples: Vec<Sample>,
    bootstrap: f64,
    episode_returns: Vec<f64>,
    terminations: Vec<crate::env::TerminationCause>,
}

fn collect_env(
    worker: &mut EnvWorker,
    params: &PolicyParams,
    n_steps: usize,
) -> Result<EnvRollout> {
    let mut samples = Vec::with_capacity(n_steps);
    let mut episode_returns = Vec::new();
    let mut terminations = Vec::new();

    for _ in 0..n_steps {
        let (mean, value, _) = forward_full(params, &worker.obs.state, &worker.obs.lambda);
        let (action, log_prob) = sample_action(&mean, &params.log_std, &mut worker.action_rng);
        let mut act4 = [0.0; 4];
        for (dst, src) in act4.iter_mut().zip(&action) {
            *dst = *src;
        }
        let step = worker.env.step(&act4)?;
        worker.pending_return += step.reward.total;

        samples.push(Sample {
            state: worker.obs.state.clone(),
            lambda: worker.obs.lambda,
            action,
            log_prob,
            reward: step.reward.total,
            value,
            done: step.done,
        });

        if step.done {
            episode_returns.push(worker.pending_return);
            if let Some(cause) = step.info.termination {
                terminations.push(cause);
            }
            worker.pending_return = 0.0;
            worker.obs = worker.env.reset_train()?;
        } else {
            worker.obs = step.observation;
        }
    }

    let (_, bootstrap, _) = forward_full(params, &worker.obs.state, &worker.obs.lambda);
    Ok(EnvRollout {
        samples,
        bootstrap,
        episode_returns,
        terminations,
    })
}

/// Collect `n_steps` per environment under the stochastic policy. Buffers
/// are concatenated by env index.
pub fn collect_rollouts(
    workers: &mut [EnvWorker],
    params: &PolicyParams,
    config: &PpoConfig,
) -> Result<RolloutBuffer> {
    let results: Vec<Result<EnvRollout>> = workers
        .par_iter_mut()
        .map(|w| collect_env(w, params, config.n_steps))
        .collect();

    let mut samples = Vec::with_capacity(config.n_envs * config.n_steps);
    let mut bootstrap = Vec::with_capacity(config.n_envs);
    let mut episode_returns = Vec::new();
    let mut terminations = Vec::new();
    for (idx, r) in results.into_iter().enumerate() {
        let r = r.map_err(|e| Error::Config(format!("env {idx}: {e}")))?;
        samples.extend(r.samples);
        bootstrap.push(r.bootstrap);
        episode_returns.extend(r.episode_returns);
        terminations.extend(r.terminations);
    }
    Ok(RolloutBuffer {
        n_envs: workers.len(),
        n_steps: config.n_steps,
        samples,
        bootstrap,
        advantages: vec![],
        returns: vec![],
        episode_returns,
        terminations,
    })
}

/// Deterministic evaluation episodes on a dedicated env seed; returns
/// (mean return, mean path error).
fn deterministic_eval(
    params: &PolicyParams,
    airframe: &AirframeParams,
    trims: &Arc<TrimTable>,
    env_config: &EnvConfig,
    seed: u64,
    episodes: usize,
) -> Result<(f64, f64)> {
    let mut total_return = 0.0;
    let mut total_mpe = 0.0;
    for ep in 0..episodes {
        let mut env = Env::new(*airframe, trims.clone(), env_config.clone(), seed ^ (ep as u64).wrapping_mul(0x9E3779B97F4A7C15))?;
        env.set_logging(true);
        let mut obs = env.reset_with_scenario(ScenarioSpec::Nominal)?;
        let mut ep_return = 0.0;
        loop {
            let mean = crate::nets::policy::actor_mean(params, &obs.state, &obs.lambda);
            let mut act4 = [0.0; 4];
            for (dst, src) in act4.iter_mut().zip(&mean) {
                *dst = *src;
            }
            let step = env.step(&act4)?;
            ep_return += step.reward.total;
            obs = step.observation;
            if step.done {
                break;
            }
        }
        let log = env.take_log();
        let (mpe, _) = episode_metrics(&log)?;
        total_return += ep_return;
        total_mpe += mpe;
    }
    Ok((total_return / episodes as f64, total_mpe / episodes as f64))
}

fn append_line(path: &Path, line: &str) -> Result<()> {
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    writeln!(f, "{line}")?;
    Ok(())
}

/// Run (or resume) PPO training. Writes `train_log.csv` (deterministic
/// columns), `timing.csv` (wall time, excluded from determinism),
/// periodic/final checkpoints, and optional deterministic eval rows in
/// `eval_log.csv`.
#[allow(clippy::too_many_arguments)]
pub fn train(
    arch: ArchTag,
    shape: NetShape,
    airframe: AirframeParams,
    env_config: EnvConfig,
    ppo_config: PpoConfig,
    seed: u64,
    out_dir: &Path,
    resume_from: Option<Checkpoint>,
) -> Result<TrainOutcome> {
    ppo_config.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let trims = Arc::new(TrimTable::build(&airframe, crate::reference::V_NOM)?);

    // Policy, optimizer, streams: fresh or restored.
    let (mut params, mut adam, mut shuffle_rng, start_iter, mut workers) = match resume_from {
        Some(ckpt) => {
            let params = ckpt.params;
            let resume = ckpt.train.ok_or_else(|| {
                Error::Checkpoint("checkpoint has no training state to resume".into())
            })?;
            if resume.env_snapshots.len() != ppo_config.n_envs {
                return Err(Error::Checkpoint(format!(
                    "checkpoint has {} envs, config wants {}",
                    resume.env_snapshots.len(),
                    ppo_config.n_envs
                )));
            }
            let mut workers = Vec::with_capacity(ppo_config.n_envs);
            for (idx, ((snap, rng), (obs, pending))) in resume
                .env_snapshots
                .into_iter()
                .zip(resume.action_rngs)
                .zip(
                    resume
                        .observations
                        .into_iter()
                        .zip(resume.pending_returns),
                )
                .enumerate()
            {
                let mut env = Env::new(airframe, trims.clone(), env_config.clone(), idx as u64)?;
                env.restore(snap);
                workers.push(EnvWorker {
                    env,
                    action_rng: rng,
                    obs,
                    pending_return: pending,
                });
            }
            (params, resume.adam, resume.shuffle_rng, resume.iteration, workers)
        }
        None => {
            let mut init_rng = ChaCha8Rng::seed_from_u64(seed);
            let params = PolicyParams::init(arch, shape.clone(), &mut init_rng);
            let adam = Adam::new(ppo_config.learning_rate, params.param_count());
            let shuffle_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5075_FFEE);
            let mut workers = Vec::with_capacity(ppo_config.n_envs);
            for idx in 0..ppo_config.n_envs {
                let env_seed = seed
                    .wrapping_add(0x9E37_79B9)
                    .wrapping_mul(idx as u64 + 1);
                let mut env = Env::new(airframe, trims.clone(), env_config.clone(), env_seed)?;
                let obs = env.reset_train()?;
                workers.push(EnvWorker {
                    env,
                    action_rng: ChaCha8Rng::seed_from_u64(seed ^ (0xAC10_0000 + idx as u64)),
                    obs,
                    pending_return: 0.0,
                });
            }
            (params, adam, shuffle_rng, 0usize, workers)
        }
    };

    if params.arch != arch {
        return Err(Error::Checkpoint(format!(
            "checkpoint architecture {} does not match configured {}",
            params.arch.label(),
            arch.label()
        )));
    }

    let train_log = out_dir.join("train_log.csv");
    let timing_log = out_dir.join("timing.csv");
    let eval_log = out_dir.join("eval_log.csv");
    if start_iter == 0 {
        std::fs::write(
            &train_log,
            "iteration,policy_loss,value_loss,entropy,approx_kl,clip_fraction,mean_episode_reward,episodes\n",
        )?;
        std::fs::write(&timing_log, "iteration,wall_time_s\n")?;
        if ppo_config.eval_every > 0 {
            std::fs::write(&eval_log, "iteration,mean_return,mean_path_error\n")?;
        }
    }

    let mut first_iteration_reward = None;
    let mut last_iteration_reward = None;

    for iter in start_iter..ppo_config.iterations {
        let t0 = Instant::now();
        let mut buffer = collect_rollouts(&mut workers, &params, &ppo_config)?;
        compute_gae(&mut buffer, ppo_config.discount, ppo_config.gae_lambda);
        let stats = ppo_update(&mut params, &mut adam, &mut buffer, &ppo_config, &mut shuffle_rng)?;

        let episodes = buffer.episode_returns.len();
        let mean_reward = if episodes > 0 {
            buffer.episode_returns.iter().sum::<f64>() / episodes as f64
        } else {
            0.0
        };
        if first_iteration_reward.is_none() && episodes > 0 {
            first_iteration_reward = Some(mean_reward);
        }
        if episodes > 0 {
            last_iteration_reward = Some(mean_reward);
        }

        append_line(
            &train_log,
            &format!(
                "{},{},{},{},{},{},{},{}",
                iter,
                stats.policy_loss,
                stats.value_loss,
                stats.entropy,
                stats.approx_kl,
                stats.clip_fraction,
                mean_reward,
                episodes
            ),
        )?;
        append_line(
            &timing_log,
            &format!("{},{:.3}", iter, t0.elapsed().as_secs_f64()),
        )?;

        if ppo_config.eval_every > 0 && (iter + 1) % ppo_config.eval_every == 0 {
            let (ret, mpe) = deterministic_eval(
                &params,
                &airframe,
                &trims,
                &env_config,
                seed ^ 0xE7A1_0000 ^ iter as u64,
                2,
            )?;
            append_line(&eval_log, &format!("{},{},{}", iter, ret, mpe))?;
        }

        let is_last = iter + 1 == ppo_config.iterations;
        if is_last || (ppo_config.checkpoint_every > 0 && (iter + 1) % ppo_config.checkpoint_every == 0)
        {
            let resume = TrainResume {
                iteration: iter + 1,
                adam: adam.clone(),
                shuffle_rng: shuffle_rng.clone(),
                env_snapshots: workers.iter().map(|w| w.env.snapshot()).collect(),
                action_rngs: workers.iter().map(|w| w.action_rng.clone()).collect(),
                observations: workers.iter().map(|w| w.obs.clone()).collect(),
                pending_returns: workers.iter().map(|w| w.pending_return).collect(),
            };
            let ckpt = Checkpoint {
                version: CHECKPOINT_VERSION,
                params: params.clone(),
                train: Some(resume),
            };
            let name = if is_last {
                "checkpoint_final.json".to_string()
            } else {
                format!("checkpoint_iter{:05}.json", iter + 1)
            };
            ckpt.save(&out_dir.join(name))?;
        }
    }

    Ok(TrainOutcome {
        final_checkpoint: out_dir.join("checkpoint_final.json"),
        iterations_run: ppo_config.iterations - start_iter,
        first_iteration_reward,
        last_iteration_reward,
    })
}
