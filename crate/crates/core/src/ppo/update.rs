//! Clipped-surrogate PPO update with analytic gradients through the policy,
//! value, and hypernetwork parameters.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::nets::policy::{
    backward_full, forward_full, gaussian_entropy, gaussian_log_prob, ParamGrads, PolicyParams,
};
use crate::ppo::{normalize_advantages, Adam, PpoConfig, RolloutBuffer, Sample};

#[derive(Debug, Clone, Copy, Default)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
}

/// Loss and gradients over one minibatch. The loss is
///   −mean(min(ρA, clip(ρ)A)) + c_v·mean((V−R)²) − c_e·H(log_std),
/// with advantages treated as fixed inputs.
pub fn minibatch_loss_and_grads(
    params: &PolicyParams,
    samples: &[Sample],
    indices: &[usize],
    advantages: &[f64],
    returns: &[f64],
    config: &PpoConfig,
) -> (f64, ParamGrads, UpdateStats) {
    let batch = indices.len() as f64;
    let eps = config.clip_ratio;
    let mut grads = ParamGrads::zeros_like(params);
    let mut policy_loss = 0.0;
    let mut value_loss = 0.0;
    let mut kl_acc = 0.0;
    let mut clipped = 0usize;

    for &i in indices {
        let s = &samples[i];
        let adv = advantages[i];
        let ret = returns[i];
        let (mean, value, cache) = forward_full(params, &s.state, &s.lambda);
        let logp = gaussian_log_prob(&s.action, &mean, &params.log_std);
        let ratio = (logp - s.log_prob).exp();

        let unclipped = ratio * adv;
        let clipped_ratio = ratio.clamp(1.0 - eps, 1.0 + eps);
        let clipped_term = clipped_ratio * adv;
        policy_loss += -unclipped.min(clipped_term);
        if (ratio - 1.0).abs() > eps {
            clipped += 1;
        }
        kl_acc += (ratio - 1.0) - ratio.ln();

        // Subgradient of −min(·,·): active only on the unclipped branch.
        let d_logp = if unclipped <= clipped_term {
            -ratio * adv / batch
        } else {
            0.0
        };

        // Value loss gradient.
        let v_err = value - ret;
        value_loss += v_err * v_err;
        let d_value = config.value_coef * 2.0 * v_err / batch;

        // Chain into the mean and log-std.
        let mut d_mean = vec![0.0; mean.len()];
        for j in 0..mean.len() {
            let std = params.log_std[j].exp();
            let z = (s.action[j] - mean[j]) / std;
            d_mean[j] = d_logp * z / std;
            grads.log_std[j] += d_logp * (z * z - 1.0);
        }
        backward_full(params, &cache, &d_mean, d_value, &mut grads);
    }

    // Entropy bonus (state-independent head: exact, not sampled).
    let entropy = gaussian_entropy(&params.log_std);
    for g in grads.log_std.iter_mut() {
        *g -= config.entropy_coef;
    }

    policy_loss /= batch;
    value_loss /= batch;
    let loss = policy_loss + config.value_coef * value_loss - config.entropy_coef * entropy;
    let stats = UpdateStats {
        policy_loss,
        value_loss,
        entropy,
        approx_kl: kl_acc / batch,
        clip_fraction: clipped as f64 / batch,
    };
    (loss, grads, stats)
}

/// Clip the gradient by its global L2 norm.
fn clip_grad_norm(flat: &mut [f64], max_norm: f64) {
    let norm = flat.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm && norm > 0.0 {
        let scale = max_norm / norm;
        for g in flat.iter_mut() {
            *g *= scale;
        }
    }
}

/// One PPO update over a completed rollout buffer: normalize advantages,
/// then run `epochs` passes of shuffled minibatches through Adam.
pub fn ppo_update<R: Rng>(
    params: &mut PolicyParams,
    adam: &mut Adam,
    buffer: &mut RolloutBuffer,
    config: &PpoConfig,
    rng: &mut R,
) -> Result<UpdateStats> {
    normalize_advantages(&mut buffer.advantages);
    let n = buffer.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut agg = UpdateStats::default();
    let mut batches = 0.0;

    for _ in 0..config.epochs {
        order.shuffle(rng);
        for chunk in order.chunks(config.minibatch_size) {
            let (loss, grads, stats) = minibatch_loss_and_grads(
                params,
                &buffer.samples,
                chunk,
                &buffer.advantages,
                &buffer.returns,
                config,
            );
            if !loss.is_finite() || !stats.approx_kl.is_finite() {
                return Err(Error::Config(format!(
                    "non-finite update: policy {} value {} kl {}",
                    stats.policy_loss, stats.value_loss, stats.approx_kl
                )));
            }
            debug_assert!((0.0..=1.0).contains(&stats.clip_fraction));
            let mut flat_grads = grads.flatten(params);
            clip_grad_norm(&mut flat_grads, config.max_grad_norm);
            let mut flat_params = params.flatten();
            adam.step(&mut flat_params, &flat_grads);
            params.set_from_flat(&flat_params);

            agg.policy_loss += stats.policy_loss;
            agg.value_loss += stats.value_loss;
            agg.entropy += stats.entropy;
            agg.approx_kl += stats.approx_kl;
            agg.clip_fraction += stats.clip_fraction;
            batches += 1.0;
        }
    }
    if batches > 0.0 {
        agg.policy_loss /= batches;
        agg.value_loss /= batches;
        agg.entropy /= batches;
        agg.approx_kl /= batches;
        agg.clip_fraction /= batches;
    }
    Ok(agg)
}
