use alphagauge::gauge::build_exact;
use alphagauge::matter::build_fluxonium;
use alphagauge::observables::model_fidelity;
use alphagauge::two_level::{build_jc_gauge, solve_alpha_jc};
use alphagauge::{CircuitParams, SquareConvention};
use alphagauge_bench::{circuit, prepared};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn fluxonium(c: &mut Criterion) {
    let mut group = c.benchmark_group("fluxonium_build");
    for nm in [120, 240] {
        let p = CircuitParams { nm, ..circuit(15, 20) };
        group.bench_with_input(BenchmarkId::from_parameter(nm), &p, |b, p| b.iter(|| build_fluxonium(black_box(p)).unwrap()));
    }
    group.finish();
}

fn exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact");
    group.sample_size(10);
    for (nkeep, nc) in [(10, 20), (20, 30), (20, 60)] {
        let (_, m, ctx) = prepared(nkeep, nc, 0.5);
        let label = format!("{nkeep}x{nc}");
        group.bench_with_input(BenchmarkId::new("build", &label), &ctx, |b, ctx| {
            b.iter(|| build_exact(&m, black_box(ctx), nc, SquareConvention::FullSquare).unwrap())
        });
        let h = build_exact(&m, &ctx, nc, SquareConvention::FullSquare).unwrap();
        group.bench_with_input(BenchmarkId::new("eigenvalues", &label), &h, |b, h| b.iter(|| h.eigenvalues().unwrap()));
        group.bench_with_input(BenchmarkId::new("eigenvectors", &label), &h, |b, h| b.iter(|| h.eig().unwrap()));
    }
    group.finish();
}

fn two_level(c: &mut Criterion) {
    let (p, m, ctx) = prepared(20, 30, 0.0);
    c.bench_function("alpha_jc_solve", |b| b.iter(|| solve_alpha_jc(black_box(&ctx)).unwrap()));
    c.bench_function("jc_gauge_model", |b| b.iter(|| build_jc_gauge(&m, black_box(&ctx), 30).unwrap()));
    let (model, _) = build_jc_gauge(&m, &ctx, 30).unwrap();
    let mut group = c.benchmark_group("fidelity");
    group.sample_size(10);
    group.bench_function("jc_gauge", |b| b.iter(|| model_fidelity(&p, &m, black_box(&model)).unwrap()));
    group.finish();
}

criterion_group!(benches, fluxonium, exact, two_level);
criterion_main!(benches);
