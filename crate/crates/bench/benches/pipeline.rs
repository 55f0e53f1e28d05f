use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sls_core::toybench::two_blobs;
use sls_core::{joint_probs, plan_prune, run_tsne, silhouette_score, ScProfile, TsneConfig};

fn silhouette(c: &mut Criterion) {
    let mut group = c.benchmark_group("silhouette");
    for n in [200, 1000] {
        let (x, labels) = two_blobs(n / 2, 2, 4.0, 1.0, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| silhouette_score(black_box(x.view()), &labels).unwrap())
        });
    }
    group.finish();
}

fn affinities(c: &mut Criterion) {
    let mut group = c.benchmark_group("joint_probs");
    for n in [200, 500] {
        let (x, _) = two_blobs(n / 2, 32, 4.0, 1.0, 2);
        let config = TsneConfig::default();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| joint_probs(black_box(x.view()), &config).unwrap())
        });
    }
    group.finish();
}

fn tsne(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_tsne");
    group.sample_size(10);
    let (x, _) = two_blobs(50, 16, 4.0, 1.0, 3);
    let config = TsneConfig { perplexity: 20.0, n_iter: 300, ..TsneConfig::default() };
    group.bench_function("n100_300iters", |b| b.iter(|| run_tsne(black_box(x.view()), &config).unwrap()));
    group.finish();
}

fn planning(c: &mut Criterion) {
    let values: Vec<f64> = (0..48).map(|i| i as f64 / 48.0).collect();
    let profile = ScProfile::from_values("bench", values);
    c.bench_function("plan_prune/48_layers", |b| b.iter(|| plan_prune(black_box(&profile), 0.3).unwrap()));
}

criterion_group!(benches, silhouette, affinities, tsne, planning);
criterion_main!(benches);
