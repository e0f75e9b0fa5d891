use std::f64::consts::PI;

use ccbell::ball::{run_stage_with, Stage, StageConfig};
use ccbell::montecarlo::{run_experiment_with, ExperimentConfig};
use ccbell::{Description, Direction, Execution};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

const TRIALS: u64 = 200_000;

fn spin_experiment(c: &mut Criterion) {
    let config = ExperimentConfig::new(
        Direction::z(),
        Direction::new(PI / 3.0).unwrap(),
        TRIALS,
        Description::Alice,
        1,
    );
    let mut group = c.benchmark_group("spin_experiment");
    group.throughput(Throughput::Elements(TRIALS));
    for execution in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{execution:?}")),
            &execution,
            |b, &e| b.iter(|| run_experiment_with(&config, e).unwrap()),
        );
    }
    group.finish();
}

fn ball_stage(c: &mut Criterion) {
    let config = StageConfig::new(Stage::First, TRIALS, 1);
    let mut group = c.benchmark_group("ball_stage");
    group.throughput(Throughput::Elements(TRIALS));
    for execution in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{execution:?}")),
            &execution,
            |b, &e| b.iter(|| run_stage_with(&config, e).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(benches, spin_experiment, ball_stage);
criterion_main!(benches);
