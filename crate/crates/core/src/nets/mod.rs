//! Networks: dense layers, the conditioning hypernetwork, adaptation
//! primitives, the Gaussian policy head, hand-written reverse-mode
//! gradients, and analysis utilities (spectral norms, parameter and FLOP
//! accounting, checkpoints).

pub mod checkpoint;
pub mod dense;
pub mod linalg;
pub mod policy;
pub mod spectral;

pub use checkpoint::{Checkpoint, CHECKPOINT_VERSION};
pub use dense::{DenseCache, DenseNet, Layer, LayerAdapt, LoraFactors, NetGrads};
pub use linalg::{film_modulate, lora_apply, Matrix};
pub use policy::{
    actor_mean, backward_full, forward_full, gaussian_entropy, gaussian_log_prob, sample_action,
    ArchTag, EvalCache, NetShape, ParamGrads, PolicyParams,
};
pub use spectral::{lipschitz_bound, spectral_norm};
