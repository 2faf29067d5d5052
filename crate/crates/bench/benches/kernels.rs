use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use dsi_barrier_core::momentum::{cutoff_transform, mode_coefficients, CutoffSpec};
use dsi_barrier_core::{ModelParams, ZeroModeState, DEFAULT_A0};

fn state(lambda: f64) -> ZeroModeState {
    ZeroModeState::new(ModelParams::new(1.0, lambda, 1.0).unwrap(), DEFAULT_A0).unwrap()
}

fn zero_mode(c: &mut Criterion) {
    let s = state(1.2);
    c.bench_function("evaluate_psi0", |b| {
        b.iter(|| s.evaluate(black_box(37.5)).unwrap())
    });
    c.bench_function("build_state", |b| {
        b.iter(|| {
            ZeroModeState::new(
                ModelParams::new(1.0, black_box(1.7), 0.8).unwrap(),
                DEFAULT_A0,
            )
            .unwrap()
        })
    });
}

fn momentum(c: &mut Criterion) {
    let s = state(3.0);
    let spec = CutoffSpec::new(s.params(), 0).with_epsilon(1e-3);
    c.bench_function("cutoff_transform_subcritical", |b| {
        b.iter(|| cutoff_transform(&s, &spec, black_box(1e-3)).unwrap())
    });
    let s = state(1.2);
    c.bench_function("mode_coefficients_k64", |b| {
        b.iter(|| mode_coefficients(&s, black_box(64)).unwrap())
    });
}

criterion_group!(benches, zero_mode, momentum);
criterion_main!(benches);
