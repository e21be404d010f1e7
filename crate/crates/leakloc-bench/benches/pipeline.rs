use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use leakloc::evaluation::evaluate_single_leak;
use leakloc::geometry::{Point, VoronoiDiagram};
use leakloc::predictors::ClassicPredictor;
use leakloc::projection::dykstra_project;
use leakloc::refined::RefinedDiagram;
use leakloc::synthesis::{generate_dataset, SynthParams};
use leakloc_bench::wing_setup;

fn bench_classic_build(c: &mut Criterion) {
    let setup = wing_setup();
    c.bench_function("classic_diagram_k10", |b| {
        b.iter(|| VoronoiDiagram::build(black_box(&setup.connections)))
    });
}

fn bench_refined_build(c: &mut Criterion) {
    let setup = wing_setup();
    let mut group = c.benchmark_group("refined");
    // Dominated by the emptiness probe grid; keep the sample count low.
    group.sample_size(10);
    group.bench_function("order2_diagram_k10", |b| {
        b.iter(|| RefinedDiagram::build(black_box(&setup.connections), 2).unwrap())
    });
    group.finish();
}

fn bench_projection(c: &mut Criterion) {
    let setup = wing_setup();
    let vd = VoronoiDiagram::build(&setup.connections);
    let cell = vd.cell(4);
    let y = Point::new(-3.0, 9.0);
    c.bench_function("dykstra_project", |b| {
        b.iter(|| dykstra_project(black_box(y), black_box(cell)))
    });
}

fn bench_single_leak_evaluation(c: &mut Criterion) {
    let setup = wing_setup();
    let vd = VoronoiDiagram::build(&setup.connections);
    let predictor = ClassicPredictor::new(&vd);
    let dataset = generate_dataset(
        &setup,
        500,
        0,
        &SynthParams {
            alpha: 4.0,
            sigma: 0.05,
        },
        1,
    );
    let mut group = c.benchmark_group("evaluation");
    group.sample_size(20);
    group.bench_function("single_leak_500", |b| {
        b.iter(|| evaluate_single_leak(black_box(&dataset), &predictor).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_classic_build,
    bench_refined_build,
    bench_projection,
    bench_single_leak_evaluation
);
criterion_main!(benches);
