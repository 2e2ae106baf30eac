use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sighedge_core::{
    gram_matrix, ito_kernel_grid, realized_quadratic_variation, simulate_gbm, strat_kernel_grid,
    truncated_signature, GbmSpec,
};

fn spec(steps: usize) -> GbmSpec {
    GbmSpec {
        steps,
        ..GbmSpec::default()
    }
}

fn kernel_grids(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel_grid");
    for steps in [30, 120] {
        let paths = simulate_gbm(&spec(steps), 2).unwrap();
        for r in [1, 4] {
            let id = format!("M{steps}_r{r}");
            group.bench_function(BenchmarkId::new("stratonovich", &id), |b| {
                b.iter(|| strat_kernel_grid(black_box(&paths[0]), black_box(&paths[1]), r).unwrap())
            });
        }
        let qx = realized_quadratic_variation(&paths[0]);
        let qy = realized_quadratic_variation(&paths[1]);
        group.bench_function(BenchmarkId::new("ito", format!("M{steps}_r4")), |b| {
            b.iter(|| ito_kernel_grid(black_box(&paths[0]), black_box(&paths[1]), &qx, &qy, 4).unwrap())
        });
    }
    group.finish();
}

fn gram(c: &mut Criterion) {
    let mut group = c.benchmark_group("gram_matrix");
    group.sample_size(10);
    let paths = simulate_gbm(&spec(120), 32).unwrap();
    for n in [8, 32] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| gram_matrix(black_box(&paths[..n]), 2).unwrap())
        });
    }
    group.finish();
}

fn signature(c: &mut Criterion) {
    let mut group = c.benchmark_group("truncated_signature");
    let path = &simulate_gbm(&spec(120), 1).unwrap()[0];
    for depth in [2, 4, 6] {
        group.bench_with_input(BenchmarkId::from_parameter(depth), &depth, |b, &depth| {
            b.iter(|| truncated_signature(black_box(path), depth).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, kernel_grids, gram, signature);
criterion_main!(benches);
