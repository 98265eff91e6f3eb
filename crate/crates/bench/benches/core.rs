use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use quantbound::bounds::{glm_wasserstein_bound, orlicz_bound};
use quantbound::infogeom::{
    generalized_fisher_message, message_information_terms, prior_omega, score_projection_bound,
};
use quantbound::rng::from_seed;
use quantbound::{
    GaussianLocation, GridQuantizer, LossOrder, ParameterSpace, QuantizedMleEstimator, RaisedCosine, Scheme,
    SignInversionEstimator, SignQuantizer,
};

fn information(c: &mut Criterion) {
    let space = ParameterSpace::new(2, 1.0).unwrap();
    let g = GaussianLocation::new(1.0, space).unwrap();
    let prior = RaisedCosine::new(space);
    let grid = GridQuantizer::new(3, 2, 4.0).unwrap();
    let mut group = c.benchmark_group("information");
    for p in [1.8, 2.0, 3.0] {
        let o = LossOrder::new(p).unwrap();
        group.bench_with_input(BenchmarkId::new("message_fisher_grid3", p), &o, |b, &o| {
            b.iter(|| generalized_fisher_message(&grid, &g, 1, black_box(&[0.3, -0.2]), o).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("expected_message_terms_d2", p), &o, |b, &o| {
            b.iter(|| message_information_terms(&grid, &g, &prior, 4, o).unwrap())
        });
    }
    group.bench_function("prior_omega_p1.8", |b| {
        b.iter(|| prior_omega(&prior, LossOrder::new(black_box(1.8)).unwrap()).unwrap())
    });
    group.bench_function("orlicz_certificate_d2", |b| {
        b.iter(|| score_projection_bound(&g, 2.0, 11, 16, &mut from_seed(1)).unwrap())
    });
    group.finish();
}

fn bounds(c: &mut Criterion) {
    let o = LossOrder::new(1.8).unwrap();
    c.bench_function("bounds/glm_wasserstein_low", |b| {
        b.iter(|| glm_wasserstein_bound(black_box(300), 3, 2, 1.0, 1.0, o).unwrap())
    });
    c.bench_function("bounds/orlicz_low", |b| b.iter(|| orlicz_bound(black_box(300), 3, 2, 1.0, 1.6, 2.0, o).unwrap()));
}

fn trials(c: &mut Criterion) {
    let space = ParameterSpace::new(2, 1.0).unwrap();
    let g = GaussianLocation::new(1.0, space).unwrap();
    let sign = SignInversionEstimator::new(SignQuantizer::new(1, 2).unwrap());
    let mle = QuantizedMleEstimator::new(GridQuantizer::new(3, 2, 4.0).unwrap());
    let mut group = c.benchmark_group("trial");
    for n in [30usize, 300] {
        group.bench_with_input(BenchmarkId::new("sign_inversion", n), &n, |b, &n| {
            let mut rng = from_seed(3);
            b.iter(|| sign.run_trial(&g, &[0.2, -0.4], n, &mut rng).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("quantized_mle", n), &n, |b, &n| {
            let mut rng = from_seed(3);
            b.iter(|| mle.run_trial(&g, &[0.2, -0.4], n, &mut rng).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, information, bounds, trials);
criterion_main!(benches);
