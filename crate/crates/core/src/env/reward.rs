//! Reward shaping: dense exponential tracking terms plus input terms
//! (saturation barrier and command-rate penalty), and an alternative banded
//! tracking mode.

use serde::{Deserialize, Serialize};

use crate::dynamics::Commands;

/// Exponential weights for the nine tracking channels: body rates, then
/// (φ, θ, χ), then body-frame position.
const K1: [f64; 9] = [0.1, 0.1, 0.1, 0.2, 0.2, 0.2, 0.5, 0.5, 0.5];
const K2: [f64; 9] = [1.0, 1.0, 1.0, 5.0, 5.0, 5.0, 0.37, 0.37, 0.37];

/// Barrier weight on log margins.
const K3: f64 = 0.02;
/// Weight on squared command rate.
const K4: f64 = 0.2;
const MARGIN_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    Dense,
    Banded,
}

/// Banded-mode tolerances per channel group (tight, loose); boundaries
/// inclusive.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BandedTolerances {
    pub rates: (f64, f64),
    pub attitude: (f64, f64),
    pub position: (f64, f64),
}

impl Default for BandedTolerances {
    fn default() -> Self {
        BandedTolerances {
            rates: (0.05, 0.15),
            attitude: (0.05, 0.15),
            position: (1.0, 3.0),
        }
    }
}

/// Per-step reward decomposition. `total` is exactly the sum of the active
/// tracking term and the two input terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    /// Dense exponential tracking term.
    pub tracking: f64,
    /// Banded tracking term (present in banded mode).
    pub banded: Option<f64>,
    /// Log-margin barrier term.
    pub barrier: f64,
    /// Command-rate penalty (non-positive).
    pub rate_penalty: f64,
    pub total: f64,
}

/// Dense tracking reward: Σ k₁ᵢ exp(−k₂ᵢ |ȳᵢ|); equals 2.4 at zero error.
pub fn tracking_reward(y_bar: &[f64; 9]) -> f64 {
    let mut sum = 0.0;
    for i in 0..9 {
        sum += K1[i] * (-K2[i] * y_bar[i].abs()).exp();
    }
    sum
}

/// Input reward: barrier on the element-wise margin plus a quadratic penalty
/// on the command change. Returns (barrier, rate_penalty).
pub fn input_reward(margin: &[f64; 4], cmd: &Commands, cmd_prev: &Commands) -> (f64, f64) {
    let barrier = K3 * margin.iter().map(|m| (m + MARGIN_EPS).ln()).sum::<f64>();
    let c = cmd.to_array();
    let p = cmd_prev.to_array();
    let sq: f64 = (0..4).map(|i| (c[i] - p[i]) * (c[i] - p[i])).sum();
    (barrier, -K4 * sq)
}

/// Banded tracking: per channel group, 1.0 inside the tight tolerance, 0.3
/// inside the loose one, 0 otherwise; group error is the largest channel
/// magnitude in the group.
pub fn banded_reward(y_bar: &[f64; 9], tol: &BandedTolerances) -> f64 {
    let group = |lo: usize, hi: usize, t: (f64, f64)| -> f64 {
        let e = y_bar[lo..=hi].iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if e <= t.0 {
            1.0
        } else if e <= t.1 {
            0.3
        } else {
            0.0
        }
    };
    group(0, 2, tol.rates) + group(3, 5, tol.attitude) + group(6, 8, tol.position)
}

/// Full per-step reward.
pub fn compute_reward(
    y_bar: &[f64; 9],
    margin: &[f64; 4],
    cmd: &Commands,
    cmd_prev: &Commands,
    mode: RewardMode,
    tol: &BandedTolerances,
) -> RewardBreakdown {
    let tracking = tracking_reward(y_bar);
    let (barrier, rate_penalty) = input_reward(margin, cmd, cmd_prev);
    let (banded, active_tracking) = match mode {
        RewardMode::Dense => (None, tracking),
        RewardMode::Banded => {
            let b = banded_reward(y_bar, tol);
            (Some(b), b)
        }
    };
    RewardBreakdown {
        tracking,
        banded,
        barrier,
        rate_penalty,
        total: active_tracking + barrier + rate_penalty,
    }
}
