//! Batch simulation and the covering suite, sequential against rayon.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hybrid_avoidance::controller::Gains;
use hybrid_avoidance::obstacle::Obstacle;
use hybrid_avoidance::parallel::Execution;
use hybrid_avoidance::properties::covering;
use hybrid_avoidance::sampling::sample_workspace;
use hybrid_avoidance::simulator::{simulate_batch, SolverConfig};
use hybrid_avoidance::tuning::{auto_tune, TuneOptions};

fn bench(c: &mut Criterion) {
    let obstacles = vec![
        Obstacle::ball(&[4.0, 0.0]).unwrap(),
        Obstacle::ball(&[-3.0, 4.0]).unwrap(),
        Obstacle::from_rows(&[0.0, -5.0], &[vec![1.0, 0.2], vec![0.2, 0.6]]).unwrap(),
    ];
    let tuned = auto_tune(&obstacles, &[], &TuneOptions::default()).unwrap();
    let w = &tuned.workspace;
    let gains = Gains::uniform(0.25).unwrap();
    let cfg = SolverConfig {
        step: 1e-2,
        t_max: 40.0,
        ..SolverConfig::default()
    };
    let x0s = sample_workspace(w, 16, 7);

    let mut group = c.benchmark_group("simulate_batch");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| black_box(simulate_batch(w, &gains, &x0s, &cfg, exec)))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("covering");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| black_box(covering(w, 2_000, 1, exec)))
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
