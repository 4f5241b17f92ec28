//! Policy parameter containers and the five architecture variants: a plain
//! MLP over (state ∥ λ), and conditioned policies whose hidden layers are
//! adapted by a hypernetwork driven by the failure vector λ — feature-wise
//! modulation or low-rank weight updates, each optionally extended to the
//! critic ("hyper-conditioned critic").
//!
//! The hypernetwork is shared: with a hyper-conditioned critic it emits the
//! actor adaptation followed by the critic adaptation from one output layer,
//! so deployment cost (actor path) is unchanged.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nets::dense::{
    backward_adapted, forward_adapted, AdaptGrad, DenseCache, DenseNet, Layer, LayerAdapt,
    LoraFactors, NetGrads,
};
use crate::nets::linalg::Matrix;

const LOG_2PI: f64 = 1.8378770664093453; // ln(2π)

/// Architecture selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ArchTag {
    Mlp,
    Film { hc: bool },
    Lora { rank: usize, hc: bool },
}

impl ArchTag {
    pub fn uses_hypernet(&self) -> bool {
        !matches!(self, ArchTag::Mlp)
    }

    pub fn hyper_conditioned_critic(&self) -> bool {
        matches!(self, ArchTag::Film { hc: true } | ArchTag::Lora { hc: true, .. })
    }

    pub fn rank(&self) -> Option<usize> {
        match self {
            ArchTag::Lora { rank, .. } => Some(*rank),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            ArchTag::Mlp => "MLP".into(),
            ArchTag::Film { hc: false } => "FiLM".into(),
            ArchTag::Film { hc: true } => "FiLM+HC".into(),
            ArchTag::Lora { rank, hc: false } => format!("LoRA({rank})"),
            ArchTag::Lora { rank, hc: true } => format!("LoRA({rank})+HC"),
        }
    }

    /// Parse tags like `mlp`, `film`, `film_hc`, `lora16`, `lora64_hc`.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim().to_lowercase();
        match t.as_str() {
            "mlp" => return Ok(ArchTag::Mlp),
            "film" => return Ok(ArchTag::Film { hc: false }),
            "film_hc" => return Ok(ArchTag::Film { hc: true }),
            _ => {}
        }
        if let Some(rest) = t.strip_prefix("lora") {
            let (digits, hc) = match rest.strip_suffix("_hc") {
                Some(d) => (d, true),
                None => (rest, false),
            };
            if let Ok(rank) = digits.parse::<usize>() {
                if rank > 0 {
                    return Ok(ArchTag::Lora { rank, hc });
                }
            }
        }
        Err(Error::Config(format!("unknown architecture tag '{s}'")))
    }
}

/// Layer widths; the defaults match the deployed controller sizes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetShape {
    pub state_dim: usize,
    pub lambda_dim: usize,
    pub action_dim: usize,
    pub hidden: Vec<usize>,
    pub hyper_hidden: Vec<usize>,
}

impl Default for NetShape {
    fn default() -> Self {
        NetShape {
            state_dim: 34,
            lambda_dim: 6,
            action_dim: 4,
            hidden: vec![64, 64],
            hyper_hidden: vec![32, 32],
        }
    }
}

impl NetShape {
    /// Hypernetwork output width feeding one adapted network.
    fn adapt_width(&self, arch: &ArchTag) -> usize {
        match arch {
            ArchTag::Mlp => 0,
            ArchTag::Film { .. } => self.hidden.iter().map(|w| 2 * w).sum(),
            ArchTag::Lora { rank, .. } => self.hidden.len() * rank,
        }
    }

    fn hyper_out_width(&self, arch: &ArchTag) -> usize {
        let actor = self.adapt_width(arch);
        if arch.hyper_conditioned_critic() {
            2 * actor
        } else {
            actor
        }
    }
}

/// Full trainable parameter set for one policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub arch: ArchTag,
    pub shape: NetShape,
    pub actor: DenseNet,
    pub actor_lora: Option<Vec<LoraFactors>>,
    pub critic: DenseNet,
    pub critic_lora: Option<Vec<LoraFactors>>,
    pub hyper: Option<DenseNet>,
    /// State-independent action log standard deviations.
    pub log_std: Vec<f64>,
}

fn build_dense<R: Rng>(
    dims: &[usize],
    hidden_gain: f64,
    out_gain: f64,
    zero_out: bool,
    rng: &mut R,
) -> DenseNet {
    let mut layers = Vec::new();
    for i in 0..dims.len() - 1 {
        let (rows, cols) = (dims[i + 1], dims[i]);
        let last = i == dims.len() - 2;
        let w = if last && zero_out {
            Matrix::zeros(rows, cols)
        } else {
            Matrix::orthogonal(rows, cols, if last { out_gain } else { hidden_gain }, rng)
        };
        layers.push(Layer {
            w,
            b: vec![0.0; rows],
        });
    }
    DenseNet { layers }
}

fn build_lora<R: Rng>(input_dim: usize, hidden: &[usize], rank: usize, rng: &mut R) -> Vec<LoraFactors> {
    let mut factors = Vec::new();
    let mut n_in = input_dim;
    for &n_out in hidden {
        // U zero, V Gaussian: the initial update is zero with a live
        // gradient path.
        let sd = 1.0 / (n_in as f64).sqrt();
        factors.push(LoraFactors {
            u: Matrix::zeros(n_out, rank),
            v: Matrix::gaussian(n_in, rank, sd, rng),
        });
        n_in = n_out;
    }
    factors
}

impl PolicyParams {
    /// Initialize a policy: orthogonal hidden layers (gain √2), small-gain
    /// actor output, unit-gain critic output, and log-std at ln(0.3).
    ///
    /// The identity start (adaptation inactive at step zero) comes from a
    /// zero hypernetwork output layer for feature-wise modulation, and from
    /// zero U factors for low-rank adaptation. A low-rank hypernetwork
    /// keeps a small nonzero output layer: zeroing both ends of the
    /// U·diag(r)·Vᵀ product would kill the gradients of each (dU ∝ r and
    /// dr ∝ Uᵀ), leaving the adaptation permanently untrained.
    pub fn init<R: Rng>(arch: ArchTag, shape: NetShape, rng: &mut R) -> Self {
        let hyper = arch.uses_hypernet();
        let hc = arch.hyper_conditioned_critic();
        let actor_in = if hyper {
            shape.state_dim
        } else {
            shape.state_dim + shape.lambda_dim
        };
        let critic_in = if hc {
            shape.state_dim
        } else {
            shape.state_dim + shape.lambda_dim
        };
        let gain_hidden = 2.0_f64.sqrt();

        let mut actor_dims = vec![actor_in];
        actor_dims.extend(&shape.hidden);
        actor_dims.push(shape.action_dim);
        let actor = build_dense(&actor_dims, gain_hidden, 0.01, false, rng);

        let mut critic_dims = vec![critic_in];
        critic_dims.extend(&shape.hidden);
        critic_dims.push(1);
        let critic = build_dense(&critic_dims, gain_hidden, 1.0, false, rng);

        let hyper_net = if hyper {
            let mut dims = vec![shape.lambda_dim];
            dims.extend(&shape.hyper_hidden);
            dims.push(shape.hyper_out_width(&arch));
            let zero_out = matches!(arch, ArchTag::Film { .. });
            Some(build_dense(&dims, gain_hidden, 0.1, zero_out, rng))
        } else {
            None
        };

        let actor_lora = arch
            .rank()
            .map(|rank| build_lora(actor_in, &shape.hidden, rank, rng));
        let critic_lora = match (arch.rank(), hc) {
            (Some(rank), true) => Some(build_lora(critic_in, &shape.hidden, rank, rng)),
            _ => None,
        };

        let log_std = vec![0.3_f64.ln(); shape.action_dim];
        PolicyParams {
            arch,
            shape,
            actor,
            actor_lora,
            critic,
            critic_lora,
            hyper: hyper_net,
            log_std,
        }
    }

    /// Hypernetwork forward pass on a failure vector: the raw adaptation
    /// parameter vector (actor block first, critic block appended for
    /// hyper-conditioned critics). `None` for unconditioned policies.
    pub fn hypernet_outputs(&self, lambda: &[f64; 6]) -> Option<Vec<f64>> {
        self.hyper.as_ref().map(|h| h.forward(lambda))
    }

    /// Slice a hypernetwork output into per-hidden-layer adaptations.
    /// `critic` selects the critic block of a hyper-conditioned critic.
    fn adaptations<'a>(&self, hyper_out: &'a [f64], critic: bool) -> Vec<LayerAdapt<'a>> {
        let mut offset = if critic {
            self.shape.adapt_width(&self.arch)
        } else {
            0
        };
        let mut slices = Vec::with_capacity(self.shape.hidden.len());
        match self.arch {
            ArchTag::Mlp => {
                slices.extend(self.shape.hidden.iter().map(|_| LayerAdapt::None));
            }
            ArchTag::Film { .. } => {
                for &w in &self.shape.hidden {
                    let scale_raw = &hyper_out[offset..offset + w];
                    let shift_raw = &hyper_out[offset + w..offset + 2 * w];
                    offset += 2 * w;
                    slices.push(LayerAdapt::Film {
                        scale_raw,
                        shift_raw,
                    });
                }
            }
            ArchTag::Lora { rank, .. } => {
                for _ in &self.shape.hidden {
                    let r = &hyper_out[offset..offset + rank];
                    offset += rank;
                    slices.push(LayerAdapt::Lora { r });
                }
            }
        }
        slices
    }

    fn none_adaptations(&self) -> Vec<LayerAdapt<'static>> {
        self.shape.hidden.iter().map(|_| LayerAdapt::None).collect()
    }

    /// Exact trainable-parameter total.
    pub fn param_count(&self) -> usize {
        let lora_count = |f: &Option<Vec<LoraFactors>>| -> usize {
            f.as_ref()
                .map(|fs| fs.iter().map(|f| f.u.len() + f.v.len()).sum())
                .unwrap_or(0)
        };
        self.actor.param_count()
            + self.critic.param_count()
            + self.hyper.as_ref().map(|h| h.param_count()).unwrap_or(0)
            + lora_count(&self.actor_lora)
            + lora_count(&self.critic_lora)
            + self.log_std.len()
    }

    /// Floating-point operations for one action forward pass (actor path
    /// only): two per multiply-accumulate on every matrix-vector product,
    /// plus bias adds, activations, modulation, and factored-update work.
    /// With a hyper-conditioned critic only the actor slice of the output
    /// layer counts, since the critic is not evaluated at deployment.
    pub fn flop_count(&self) -> usize {
        let dense_cost = |net: &DenseNet, out_limit: Option<usize>| -> usize {
            let mut total = 0;
            let last = net.layers.len() - 1;
            for (i, l) in net.layers.iter().enumerate() {
                let rows = if i == last {
                    out_limit.unwrap_or(l.w.rows).min(l.w.rows)
                } else {
                    l.w.rows
                };
                total += 2 * rows * l.w.cols + rows;
                if i < last {
                    total += rows; // tanh
                }
            }
            total
        };

        let mut total = dense_cost(&self.actor, None);
        match self.arch {
            ArchTag::Mlp => {}
            ArchTag::Film { .. } => {
                // Per layer: build scale (2 ops/unit) and shift (1), apply (2).
                total += self.shape.hidden.iter().map(|w| 5 * w).sum::<usize>();
                total += dense_cost(
                    self.hyper.as_ref().unwrap(),
                    Some(self.shape.adapt_width(&self.arch)),
                );
            }
            ArchTag::Lora { rank, .. } => {
                let mut n_in = self.shape.state_dim;
                for &n_out in &self.shape.hidden {
                    // Vᵀh, r⊙c, U·d, scale-and-add into z.
                    total += 2 * n_in * rank + rank + 2 * n_out * rank + n_out;
                    n_in = n_out;
                }
                total += dense_cost(
                    self.hyper.as_ref().unwrap(),
                    Some(self.shape.adapt_width(&self.arch)),
                );
            }
        }
        total
    }

    /// Flatten every trainable parameter in a fixed order (actor, actor
    /// factors, critic, critic factors, hypernetwork, log-std).
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        let push_net = |out: &mut Vec<f64>, net: &DenseNet| {
            for l in &net.layers {
                out.extend_from_slice(&l.w.data);
                out.extend_from_slice(&l.b);
            }
        };
        let push_lora = |out: &mut Vec<f64>, f: &Option<Vec<LoraFactors>>| {
            if let Some(fs) = f {
                for f in fs {
                    out.extend_from_slice(&f.u.data);
                    out.extend_from_slice(&f.v.data);
                }
            }
        };
        push_net(&mut out, &self.actor);
        push_lora(&mut out, &self.actor_lora);
        push_net(&mut out, &self.critic);
        push_lora(&mut out, &self.critic_lora);
        if let Some(h) = &self.hyper {
            push_net(&mut out, h);
        }
        out.extend_from_slice(&self.log_std);
        out
    }

    /// Inverse of `flatten`.
    pub fn set_from_flat(&mut self, flat: &[f64]) {
        let mut pos = 0;
        let mut take = |n: usize| -> &[f64] {
            let s = &flat[pos..pos + n];
            pos += n;
            s
        };
        fn fill_net(net: &mut DenseNet, take: &mut dyn FnMut(usize) -> Vec<f64>) {
            for l in &mut net.layers {
                let n = l.w.data.len();
                l.w.data.copy_from_slice(&take(n));
                let n = l.b.len();
                l.b.copy_from_slice(&take(n));
            }
        }
        // Wrap `take` to return owned slices for the helper.
        let mut take_vec = |n: usize| -> Vec<f64> { take(n).to_vec() };
        fill_net(&mut self.actor, &mut take_vec);
        if let Some(fs) = &mut self.actor_lora {
            for f in fs {
                let n = f.u.data.len();
                f.u.data.copy_from_slice(&take_vec(n));
                let n = f.v.data.len();
                f.v.data.copy_from_slice(&take_vec(n));
            }
        }
        fill_net(&mut self.critic, &mut take_vec);
        if let Some(fs) = &mut self.critic_lora {
            for f in fs {
                let n = f.u.data.len();
                f.u.data.copy_from_slice(&take_vec(n));
                let n = f.v.data.len();
                f.v.data.copy_from_slice(&take_vec(n));
            }
        }
        if let Some(h) = &mut self.hyper {
            fill_net(h, &mut take_vec);
        }
        let n = self.log_std.len();
        self.log_std.copy_from_slice(&take_vec(n));
        assert_eq!(pos, flat.len(), "flat parameter length mismatch");
    }
}

/// Cached intermediates for one (state, λ) evaluation.
#[derive(Debug, Clone, Default)]
pub struct EvalCache {
    pub hyper_out: Option<Vec<f64>>,
    pub hyper_cache: DenseCache,
    pub actor_cache: DenseCache,
    pub critic_cache: DenseCache,
    pub actor_input: Vec<f64>,
    pub critic_input: Vec<f64>,
}

/// Gradients for every trainable parameter of a policy.
#[derive(Debug, Clone)]
pub struct ParamGrads {
    pub actor: NetGrads,
    pub critic: NetGrads,
    pub hyper: Option<NetGrads>,
    pub log_std: Vec<f64>,
}

impl ParamGrads {
    pub fn zeros_like(params: &PolicyParams) -> Self {
        ParamGrads {
            actor: NetGrads::zeros_like(&params.actor, params.actor_lora.as_ref()),
            critic: NetGrads::zeros_like(&params.critic, params.critic_lora.as_ref()),
            hyper: params
                .hyper
                .as_ref()
                .map(|h| NetGrads::zeros_like(h, None)),
            log_std: vec![0.0; params.log_std.len()],
        }
    }

    /// Flatten in the same order as `PolicyParams::flatten`.
    pub fn flatten(&self, params: &PolicyParams) -> Vec<f64> {
        let mut out = Vec::with_capacity(params.param_count());
        let push_net = |out: &mut Vec<f64>, g: &NetGrads, with_lora: bool| {
            debug_assert!(with_lora || g.du.is_empty());
            for (dw, db) in g.dw.iter().zip(&g.db) {
                out.extend_from_slice(&dw.data);
                out.extend_from_slice(db);
            }
        };
        push_net(&mut out, &self.actor, true);
        for (du, dv) in self.actor.du.iter().zip(&self.actor.dv) {
            out.extend_from_slice(&du.data);
            out.extend_from_slice(&dv.data);
        }
        push_net(&mut out, &self.critic, true);
        for (du, dv) in self.critic.du.iter().zip(&self.critic.dv) {
            out.extend_from_slice(&du.data);
            out.extend_from_slice(&dv.data);
        }
        if let Some(h) = &self.hyper {
            for (dw, db) in h.dw.iter().zip(&h.db) {
                out.extend_from_slice(&dw.data);
                out.extend_from_slice(db);
            }
        }
        out.extend_from_slice(&self.log_std);
        out
    }

    pub fn scale(&mut self, s: f64) {
        let scale_net = |g: &mut NetGrads| {
            for m in g.dw.iter_mut().chain(g.du.iter_mut()).chain(g.dv.iter_mut()) {
                m.scale_in_place(s);
            }
            for b in &mut g.db {
                for x in b {
                    *x *= s;
                }
            }
        };
        scale_net(&mut self.actor);
        scale_net(&mut self.critic);
        if let Some(h) = &mut self.hyper {
            scale_net(h);
        }
        for x in &mut self.log_std {
            *x *= s;
        }
    }
}

/// Forward pass through hypernetwork (if any), actor, and critic.
/// Returns (action mean, value, cache).
pub fn forward_full(
    params: &PolicyParams,
    state: &[f64],
    lambda: &[f64; 6],
) -> (Vec<f64>, f64, EvalCache) {
    let mut cache = EvalCache::default();

    let hyper_out = params.hyper.as_ref().map(|h| {
        forward_adapted(
            h,
            None,
            lambda,
            &vec![LayerAdapt::None; h.layers.len() - 1],
            &mut cache.hyper_cache,
        )
    });

    let actor_input: Vec<f64> = if params.arch.uses_hypernet() {
        state.to_vec()
    } else {
        let mut v = state.to_vec();
        v.extend_from_slice(lambda);
        v
    };
    let critic_input: Vec<f64> = if params.arch.hyper_conditioned_critic() {
        state.to_vec()
    } else {
        let mut v = state.to_vec();
        v.extend_from_slice(lambda);
        v
    };

    let actor_adapt = match &hyper_out {
        Some(out) => params.adaptations(out, false),
        None => params.none_adaptations(),
    };
    let mean = forward_adapted(
        &params.actor,
        params.actor_lora.as_ref(),
        &actor_input,
        &actor_adapt,
        &mut cache.actor_cache,
    );

    let critic_adapt = match (&hyper_out, params.arch.hyper_conditioned_critic()) {
        (Some(out), true) => params.adaptations(out, true),
        _ => params.none_adaptations(),
    };
    let value = forward_adapted(
        &params.critic,
        params.critic_lora.as_ref(),
        &critic_input,
        &critic_adapt,
        &mut cache.critic_cache,
    )[0];

    cache.hyper_out = hyper_out;
    cache.actor_input = actor_input;
    cache.critic_input = critic_input;
    (mean, value, cache)
}

/// Actor-only forward (deployment path).
pub fn actor_mean(params: &PolicyParams, state: &[f64], lambda: &[f64; 6]) -> Vec<f64> {
    let mut scratch = DenseCache::default();
    let hyper_out = params.hyper.as_ref().map(|h| {
        forward_adapted(
            h,
            None,
            lambda,
            &vec![LayerAdapt::None; h.layers.len() - 1],
            &mut scratch,
        )
    });
    let actor_input: Vec<f64> = if params.arch.uses_hypernet() {
        state.to_vec()
    } else {
        let mut v = state.to_vec();
        v.extend_from_slice(lambda);
        v
    };
    let adapt = match &hyper_out {
        Some(out) => params.adaptations(out, false),
        None => params.none_adaptations(),
    };
    let mut cache = DenseCache::default();
    forward_adapted(
        &params.actor,
        params.actor_lora.as_ref(),
        &actor_input,
        &adapt,
        &mut cache,
    )
}

/// Accumulate adaptation gradients into the flat hypernetwork output
/// gradient at the right offsets.
fn scatter_adapt_grads(
    params: &PolicyParams,
    adapt_grads: &[AdaptGrad],
    critic: bool,
    d_hyper_out: &mut [f64],
) {
    let mut offset = if critic {
        params.shape.adapt_width(&params.arch)
    } else {
        0
    };
    for g in adapt_grads {
        match g {
            AdaptGrad::None => {}
            AdaptGrad::Film {
                d_scale_raw,
                d_shift_raw,
            } => {
                let w = d_scale_raw.len();
                for (dst, src) in d_hyper_out[offset..offset + w].iter_mut().zip(d_scale_raw) {
                    *dst += src;
                }
                for (dst, src) in d_hyper_out[offset + w..offset + 2 * w]
                    .iter_mut()
                    .zip(d_shift_raw)
                {
                    *dst += src;
                }
                offset += 2 * w;
            }
            AdaptGrad::Lora { d_r } => {
                for (dst, src) in d_hyper_out[offset..offset + d_r.len()].iter_mut().zip(d_r) {
                    *dst += src;
                }
                offset += d_r.len();
            }
        }
    }
}

/// Reverse pass for one sample: upstream gradients on the action mean and
/// the value flow through the actor, critic, their adaptation vectors, and
/// the shared hypernetwork. Gradients accumulate into `grads`.
pub fn backward_full(
    params: &PolicyParams,
    cache: &EvalCache,
    d_mean: &[f64],
    d_value: f64,
    grads: &mut ParamGrads,
) {
    let mut d_hyper_out = cache
        .hyper_out
        .as_ref()
        .map(|o| vec![0.0; o.len()]);

    let actor_adapt = match &cache.hyper_out {
        Some(out) => params.adaptations(out, false),
        None => params.none_adaptations(),
    };
    let (_, actor_adapt_grads) = backward_adapted(
        &params.actor,
        params.actor_lora.as_ref(),
        &actor_adapt,
        &cache.actor_cache,
        d_mean,
        &mut grads.actor,
    );
    if let Some(d) = d_hyper_out.as_mut() {
        scatter_adapt_grads(params, &actor_adapt_grads, false, d);
    }

    if d_value != 0.0 {
        let critic_adapt = match (&cache.hyper_out, params.arch.hyper_conditioned_critic()) {
            (Some(out), true) => params.adaptations(out, true),
            _ => params.none_adaptations(),
        };
        let (_, critic_adapt_grads) = backward_adapted(
            &params.critic,
            params.critic_lora.as_ref(),
            &critic_adapt,
            &cache.critic_cache,
            &[d_value],
            &mut grads.critic,
        );
        if params.arch.hyper_conditioned_critic() {
            if let Some(d) = d_hyper_out.as_mut() {
                scatter_adapt_grads(params, &critic_adapt_grads, true, d);
            }
        }
    }

    if let (Some(h), Some(d_out), Some(hg)) =
        (&params.hyper, &d_hyper_out, grads.hyper.as_mut())
    {
        let adapt = vec![LayerAdapt::None; h.layers.len() - 1];
        backward_adapted(h, None, &adapt, &cache.hyper_cache, d_out, hg);
    }
}

/// Diagonal Gaussian sample and its log-probability. Deterministic mode is
/// the mean.
pub fn sample_action<R: Rng>(mean: &[f64], log_std: &[f64], rng: &mut R) -> (Vec<f64>, f64) {
    let action: Vec<f64> = mean
        .iter()
        .zip(log_std)
        .map(|(m, ls)| {
            let n: f64 = rng.sample(StandardNormal);
            m + ls.exp() * n
        })
        .collect();
    let logp = gaussian_log_prob(&action, mean, log_std);
    (action, logp)
}

pub fn gaussian_log_prob(action: &[f64], mean: &[f64], log_std: &[f64]) -> f64 {
    let mut logp = 0.0;
    for i in 0..action.len() {
        let std = log_std[i].exp();
        let z = (action[i] - mean[i]) / std;
        logp += -0.5 * z * z - log_std[i] - 0.5 * LOG_2PI;
    }
    logp
}

/// Entropy of the diagonal Gaussian: Σ (log σ + ½(1 + ln 2π)).
pub fn gaussian_entropy(log_std: &[f64]) -> f64 {
    log_std
        .iter()
        .map(|ls| ls + 0.5 * (1.0 + LOG_2PI))
        .sum()
}
