use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use faultwing::dynamics::rk4_step;
use faultwing::nets::{actor_mean, forward_full, spectral_norm, ArchTag, Matrix};
use faultwing_bench::{airframe, policy, quiet_env, ready_env};
use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bench_dynamics(c: &mut Criterion) {
    let params = airframe();
    let env = quiet_env(1);
    let state = *env.state();
    c.bench_function("rk4_step", |b| {
        b.iter(|| {
            rk4_step(
                black_box(&state),
                Vector3::new(2.0, -1.0, 0.3),
                &[0.0; 6],
                0.04,
                &params,
            )
            .unwrap()
        })
    });
}

fn bench_env_step(c: &mut Criterion) {
    c.bench_function("env_step_full_disturbances", |b| {
        let mut env = ready_env(2);
        b.iter(|| {
            if env.is_done() {
                env.reset_train().unwrap();
            }
            black_box(env.step(&[0.01, -0.01, 0.0, 0.02]).unwrap());
        })
    });
}

fn bench_policy_forward(c: &mut Criterion) {
    let state: Vec<f64> = (0..34).map(|i| (i as f64 * 0.13).sin()).collect();
    let lambda = [1.0, 0.25, 0.0, 0.0, 0.0, 0.0];
    for arch in [
        ArchTag::Mlp,
        ArchTag::Film { hc: false },
        ArchTag::Lora { rank: 16, hc: false },
        ArchTag::Lora { rank: 64, hc: false },
    ] {
        let params = policy(arch, 3);
        c.bench_function(&format!("actor_mean_{}", arch.label()), |b| {
            b.iter(|| black_box(actor_mean(&params, black_box(&state), &lambda)))
        });
        c.bench_function(&format!("forward_full_{}", arch.label()), |b| {
            b.iter(|| black_box(forward_full(&params, black_box(&state), &lambda)))
        });
    }
}

fn bench_spectral(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let w = Matrix::gaussian(256, 64, 1.0, &mut rng);
    c.bench_function("spectral_norm_256x64", |b| {
        b.iter(|| black_box(spectral_norm(&w, 100)))
    });
}

criterion_group!(
    benches,
    bench_dynamics,
    bench_env_step,
    bench_policy_forward,
    bench_spectral
);
criterion_main!(benches);
