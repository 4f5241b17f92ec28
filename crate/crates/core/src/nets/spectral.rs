//! Spectral norms by power iteration and the layer-product Lipschitz bound.
//!
//! With 1-Lipschitz activations (tanh), the product of the per-layer weight
//! spectral norms upper-bounds the network's input-output sensitivity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::nets::dense::DenseNet;
use crate::nets::linalg::Matrix;

/// Largest singular value of `w` by power iteration on WᵀW with a
/// fixed-seed Gaussian start vector. Runs at least `min_iters` iterations
/// (at least 50), then continues until the estimate is stationary.
pub fn spectral_norm(w: &Matrix, min_iters: usize) -> f64 {
    if w.data.iter().all(|x| *x == 0.0) {
        return 0.0;
    }
    let min_iters = min_iters.max(50);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EC7_0123);
    let mut v: Vec<f64> = (0..w.cols).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= norm;
    }

    let mut sigma = 0.0;
    let max_iters = min_iters.max(20_000);
    for iter in 0..max_iters {
        let wv = w.matvec(&v);
        let mut next = w.t_matvec(&wv);
        let n = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n == 0.0 {
            return 0.0;
        }
        for x in &mut next {
            *x /= n;
        }
        v = next;
        let s = w.matvec(&v).iter().map(|x| x * x).sum::<f64>().sqrt();
        if iter >= min_iters && (s - sigma).abs() <= 1e-14 * s.max(1.0) {
            return s;
        }
        sigma = s;
    }
    sigma
}

/// Upper bound on the Lipschitz constant of a dense tanh network: the
/// product of its layer spectral norms.
pub fn lipschitz_bound(net: &DenseNet) -> f64 {
    net.layers
        .iter()
        .map(|l| spectral_norm(&l.w, 100))
        .product()
}
