use catsurf_bench::{cone, scene, surface};
use catsurf_core::comparison::{cat_test, ModelTriangle};
use catsurf_core::polyhedral::{edge_graph_distance, refine_midpoint};
use catsurf_core::smoothing::{cap_geometry, certify, Mode};
use catsurf_core::triangulation::ve_refine;
use catsurf_core::ModelSpace;
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn trig(c: &mut Criterion) {
    let mut g = c.benchmark_group("triangle_data");
    for kappa in [-1.0, 0.0, 1.0] {
        let s = ModelSpace::new(kappa).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(kappa), &s, |b, s| b.iter(|| s.triangle_data(black_box(0.7), 0.8, 0.9).unwrap()));
    }
    g.finish();
}

fn comparison(c: &mut Criterion) {
    let t = ModelTriangle::comparison(1.0, [0.8; 3]).unwrap();
    let mut g = c.benchmark_group("cat_test");
    for n in [16, 64] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| cat_test(&t, 0.0, n).unwrap()));
    }
    g.finish();
}

fn triangulation(c: &mut Criterion) {
    let (parent, family) = scene(3);
    c.bench_function("ve_refine", |b| b.iter(|| ve_refine(&parent, black_box(&family)).unwrap()));
}

fn polyhedral(c: &mut Criterion) {
    let s = surface("icosahedron");
    let r = refine_midpoint(&refine_midpoint(&s).unwrap()).unwrap();
    c.bench_function("refine_midpoint", |b| b.iter(|| refine_midpoint(black_box(&r)).unwrap()));
    c.bench_function("edge_graph_distance", |b| b.iter(|| edge_graph_distance(black_box(&r), 0, 3).unwrap()));
}

fn smoothing(c: &mut Criterion) {
    let mut g = c.benchmark_group("smoothing");
    g.sample_size(20);
    for (name, alpha, kappa, mode) in [("flat", 2.0, 1.0, Mode::Flat), ("hyperbolic", 1.5, -1.0, Mode::Hyperbolic), ("cbb", 0.5, -1.0, Mode::Cbb)] {
        let (cm, p) = cone(alpha, kappa, mode);
        g.bench_function(BenchmarkId::new("certify", name), |b| b.iter(|| certify(&cm, &p, 2000).unwrap()));
        g.bench_function(BenchmarkId::new("cap_geometry", name), |b| b.iter(|| cap_geometry(&cm, &p).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, trig, comparison, triangulation, polyhedral, smoothing);
criterion_main!(benches);
