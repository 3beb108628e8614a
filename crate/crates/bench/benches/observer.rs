use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::rngs::StdRng;
use rand::SeedableRng;
use std::hint::black_box;
use truncio::{
    analysis_component, forced_choice_auc, normal_cdf, rate_image, sample_external, Class,
    ExtractionPattern, Method, Observer,
};
use truncio_bench::{model, shared};

fn special_functions(c: &mut Criterion) {
    c.bench_function("normal_cdf", |b| {
        b.iter(|| normal_cdf(black_box(-1.3)).unwrap())
    });
}

fn rating(c: &mut Criterion) {
    let mut group = c.benchmark_group("llr");
    for dim in [1, 4, 16] {
        let m = model(dim, 3.0, 0.5);
        let taus = shared(dim, 0.0);
        let observer = Observer::new(&m, &taus).unwrap();
        let e = vec![0.4; dim];
        group.bench_with_input(BenchmarkId::from_parameter(dim), &dim, |b, _| {
            b.iter(|| {
                observer
                    .llr(black_box(&e), ExtractionPattern::all(dim))
                    .unwrap()
            })
        });
    }
    group.finish();

    let m = model(2, 3.0, 0.5);
    let taus = shared(2, 0.0);
    let mut rng = StdRng::seed_from_u64(1);
    c.bench_function("rate_image", |b| {
        b.iter(|| {
            let f = sample_external(Class::Positive, &m, 1, &mut rng).unwrap();
            rate_image(&f[0], &m, &taus, &mut rng).unwrap()
        })
    });
}

fn areas(c: &mut Criterion) {
    let mut group = c.benchmark_group("analysis_component");
    group.sample_size(10);
    let m = model(1, 3.0, 0.5);
    let taus = shared(1, 0.0);
    for cells in [1024, 4096] {
        group.bench_with_input(
            BenchmarkId::new("quadrature", cells),
            &cells,
            |b, &cells| {
                b.iter(|| analysis_component(&m, &taus, Method::Quadrature { cells }).unwrap())
            },
        );
    }
    let m2 = model(2, 3.0, 0.5);
    let taus2 = shared(2, 0.0);
    group.bench_function("monte_carlo_1e5", |b| {
        b.iter(|| analysis_component(&m2, &taus2, Method::monte_carlo(100_000, 7)).unwrap())
    });
    group.bench_function("forced_choice_1e5", |b| {
        b.iter(|| forced_choice_auc(&m2, &taus2, 100_000, 7).unwrap())
    });
    group.finish();
}

criterion_group!(benches, special_functions, rating, areas);
criterion_main!(benches);
