use cast_core::engine::init_state;
use cast_core::exchange::exchange_step;
use cast_core::explorer::explore_step;
use cast_core::{CastParams, Mode, Objective, ObjectiveSpec, ProposalKind, RngStream, RunConfig};
use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use std::hint::black_box;

fn eval(c: &mut Criterion) {
    let mut group = c.benchmark_group("eval");
    for d in [1usize, 5, 10] {
        let x: Vec<f64> = (0..d).map(|i| 0.1 * (i as f64 + 1.0) / d as f64).collect();
        for spec in [ObjectiveSpec::ackley(d).unwrap(), ObjectiveSpec::rastrigin(d).unwrap()] {
            group.bench_with_input(BenchmarkId::new(spec.id().name(), d), &x, |b, x| {
                b.iter(|| spec.eval(black_box(x)).unwrap())
            });
        }
    }
    group.finish();
}

fn setup(particles: usize, dimension: usize, gamma: f64) -> (RunConfig, RngStream) {
    let params = CastParams::new(0.5, 0.7, 0.35, gamma, 0.005, 0.05).unwrap();
    let config = RunConfig::new(ObjectiveSpec::ackley(dimension).unwrap(), particles, 1, Mode::Cast(params));
    (config, RngStream::derive(1, "bench", 0))
}

fn explore(c: &mut Criterion) {
    let mut group = c.benchmark_group("explore_step");
    for (n, d) in [(100usize, 10usize), (1000, 5), (5000, 1)] {
        let (config, rng) = setup(n, d, 1.0);
        let state = init_state(&config.objective, &config, &rng).unwrap();
        for kind in [ProposalKind::Cauchy, ProposalKind::Gaussian] {
            group.bench_function(BenchmarkId::new(format!("{kind}"), format!("n{n}_d{d}")), |b| {
                b.iter_batched_ref(
                    || state.clone(),
                    |s| explore_step(s, &config.objective, kind, &rng, 1).unwrap(),
                    BatchSize::SmallInput,
                )
            });
        }
    }
    group.finish();
}

fn exchange(c: &mut Criterion) {
    let mut group = c.benchmark_group("exchange_step");
    for (n, gamma) in [(1000usize, 0.3), (1000, 2.0), (5000, 1.0)] {
        let (config, rng) = setup(n, 1, gamma);
        let Mode::Cast(params) = config.mode else { unreachable!() };
        let state = init_state(&config.objective, &config, &rng).unwrap();
        group.bench_function(BenchmarkId::new(format!("gamma{gamma}"), n), |b| {
            b.iter_batched_ref(
                || state.clone(),
                |s| exchange_step(s, &params, &rng, 1).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, eval, explore, exchange);
criterion_main!(benches);
