use criterion::{black_box, criterion_group, criterion_main, Criterion};
use salg::courant::axioms_residual;
use salg::forms::*;
use salg::gauge::{chern_simons, curvature, LieAlgebra};
use salg::moduli::{ComplexifiedClass, IntersectionRing, RingSpec};
use salg_bench::{connection, courant_sample, flat_background};

fn forms(c: &mut Criterion) {
    let th = connection(2, 2, 1);
    let spec = LieAlgebra::su2().pairing;
    c.bench_function("d 1-form T2", |b| b.iter(|| black_box(&th).d()));
    c.bench_function("curvature T2", |b| b.iter(|| curvature(black_box(&th)).unwrap()));
    c.bench_function("chern_simons T2", |b| b.iter(|| chern_simons(black_box(&th), &spec).unwrap()));
    let dims = [16, 16, 16, 16, 1, 1, 1, 1];
    c.bench_function("to_grid T2 16^4", |b| b.iter(|| black_box(&th).to_grid(&dims).unwrap()));
}

fn courant(c: &mut Criterion) {
    let alg = LieAlgebra::su2();
    let (data, secs, fun) = courant_sample(&alg);
    c.bench_function("axioms_residual T2", |b| b.iter(|| axioms_residual(black_box(&data), &secs, &fun).unwrap()));
}

fn moduli(c: &mut Criterion) {
    let bg = flat_background(1.5);
    let k = mode_from(&[1, 0, -1, 1]);
    c.bench_function("mode_operator su2", |b| b.iter(|| bg.mode_operator(black_box(&k)).unwrap()));
    let mut g = c.benchmark_group("condition_a");
    g.sample_size(10);
    g.bench_function("su2 kmax 1", |b| b.iter(|| bg.condition_a(1).unwrap()));
    g.finish();
    let ring = IntersectionRing::new(&RingSpec { h11: 2, kappa: vec![(0, 1, 1, 1.0)], vol_mu: 1.0 }).unwrap();
    let a = ComplexifiedClass::real(vec![1.0, 0.7]);
    c.bench_function("cone_metric_matrix h11=2", |b| b.iter(|| ring.cone_metric_matrix(black_box(&a), 1.5).unwrap()));
}

criterion_group!(benches, forms, courant, moduli);
criterion_main!(benches);
