//! Wall-clock cost of the hot path: per-frame learning at several grid
//! sizes, multi-scale detection, a full tracker step, feature extraction,
//! and one forward transform.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ladcf::features::{extract_features, extract_search_window, ColorNamesTable};
use ladcf::solver::learn;
use ladcf::spectral::{dft2, hann_window};
use ladcf::{TrackerConfig, TrackerState};
use ladcf_bench::{learning_inputs, scene};

fn bench_learn(c: &mut Criterion) {
    let mut group = c.benchmark_group("learn");
    for d in [32usize, 50, 64] {
        let (x, y, model, cfg) = learning_inputs(d);
        group.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, _| {
            b.iter(|| learn(black_box(&x), &y, &model, &cfg).unwrap());
        });
    }
    group.finish();
}

fn bench_detect(c: &mut Criterion) {
    let (frame, target) = scene(50);
    let state = TrackerState::init(&frame, target, TrackerConfig::default()).unwrap();
    c.bench_function("detect/50", |b| {
        b.iter(|| state.detect(black_box(&frame)).unwrap());
    });
}

fn bench_step(c: &mut Criterion) {
    let (frame, target) = scene(50);
    let mut state = TrackerState::init(&frame, target, TrackerConfig::default()).unwrap();
    c.bench_function("step/50", |b| {
        b.iter(|| state.step(black_box(&frame)).unwrap());
    });
}

fn bench_features(c: &mut Criterion) {
    let (frame, target) = scene(50);
    let center = (target.x + target.w / 2.0, target.y + target.h / 2.0);
    let patch = extract_search_window(&frame, 0, center, 200).unwrap();
    let window = hann_window(50).unwrap();
    c.bench_function("features/50", |b| {
        b.iter(|| {
            extract_features(black_box(&patch), ColorNamesTable::builtin(), &window).unwrap()
        });
    });
}

fn bench_spectral(c: &mut Criterion) {
    let inputs = learning_inputs(50);
    let plane = inputs.0.planes()[0].clone();
    c.bench_function("dft2/50", |b| {
        b.iter(|| dft2(black_box(&plane)).unwrap());
    });
}

criterion_group!(benches, bench_learn, bench_detect, bench_step, bench_features, bench_spectral);
criterion_main!(benches);
