//! Parallel-vs-sequential benchmarks for the data-parallel surfaces:
//! Monte-Carlo path ensembles and the divergence test matrix.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use bubblekit::calibrate::fit_qmle_default;
use bubblekit::divergence::run_matrix;
use bubblekit::model::YieldParams;
use bubblekit::sde::{
    simulate_ensemble, simulate_ensemble_seq, simulate_yield, Scheme, SimSpec, YieldModel,
};

fn ensemble_spec(n_steps: usize) -> SimSpec {
    let params = YieldParams::new(2.38e-4, 0.0099, 0.0042).unwrap();
    SimSpec {
        model: YieldModel::cir(&params),
        x0: params.gamma_star(),
        n_steps,
        dt: 1.0 / 252.0,
        seed: 7,
        scheme: Scheme::EulerFullTruncation,
    }
}

fn bench_ensemble(c: &mut Criterion) {
    let mut group = c.benchmark_group("monte_carlo_ensemble");
    for paths in [256usize, 2048] {
        let spec = ensemble_spec(252);
        group.bench_with_input(BenchmarkId::new("parallel", paths), &paths, |b, &paths| {
            b.iter(|| black_box(simulate_ensemble(&spec, paths).unwrap()));
        });
        group.bench_with_input(
            BenchmarkId::new("sequential", paths),
            &paths,
            |b, &paths| {
                b.iter(|| black_box(simulate_ensemble_seq(&spec, paths).unwrap()));
            },
        );
    }
    group.finish();
}

fn bench_divergence_matrix(c: &mut Criterion) {
    let spec = ensemble_spec(504);
    let series = simulate_yield(&spec).unwrap();
    let null = fit_qmle_default(&series, 1.0).unwrap();

    let mut group = c.benchmark_group("divergence_matrix");
    group.sample_size(10);
    // run_matrix dispatches by the `parallel` feature; a single-thread pool
    // provides the sequential baseline under the same build
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(run_matrix(&series, &null, None)));
    });
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    group.bench_function("single_thread", |b| {
        b.iter(|| single.install(|| black_box(run_matrix(&series, &null, None))));
    });
    group.finish();
}

criterion_group!(benches, bench_ensemble, bench_divergence_matrix);
criterion_main!(benches);
