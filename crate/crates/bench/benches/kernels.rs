use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use gwlocal_bench::gwlocal_core::coeffring::{q, qi};
use gwlocal_bench::gwlocal_core::genfun::{f_dg, Route};
use gwlocal_bench::gwlocal_core::hypertail::{hypertail, HypertailCaps, Locus};
use gwlocal_bench::gwlocal_core::loc0::{descendant_invariant_pn, enumerate_fixed_graphs, TorusWeights, TwistSign, TwistSpec};
use gwlocal_bench::gwlocal_core::series::{lagrange_coeff, tree_function, MultiSeries, VariableSet};

fn series(c: &mut Criterion) {
    let v = VariableSet::builder().var("x", 12).var("y", 6).build();
    let x = MultiSeries::var(&v, "x").unwrap();
    let y = MultiSeries::var(&v, "y").unwrap();
    let f = &(&MultiSeries::constant(&v, qi(1)) + &x.scale(&q(2, 3))) + &(&x * &y);
    c.bench_function("series inverse 12x6", |b| b.iter(|| black_box(&f).inverse().unwrap()));
    c.bench_function("series exp 12x6", |b| b.iter(|| (&x + &y).exp().unwrap()));
    let t = tree_function(16);
    c.bench_function("lagrange_coeff order 16", |b| b.iter(|| lagrange_coeff(black_box(&t), 16).unwrap()));
}

fn generating_functions(c: &mut Criterion) {
    c.bench_function("F_dg closed d=2 g=3 z^8", |b| b.iter(|| f_dg(2, 3, 8, &[Route::R3], None).unwrap()));
    c.bench_function("F_dg raw sum d=1 g=2 z^6", |b| b.iter(|| f_dg(1, 2, 6, &[Route::R2], None).unwrap()));
}

fn hypertails(c: &mut Criterion) {
    c.bench_function("hypertail Q0 caps (1,3,4)", |b| b.iter(|| hypertail(Locus::Q0, HypertailCaps::new(1, 3, 4)).unwrap()));
}

fn localization(c: &mut Criterion) {
    let w2 = TorusWeights::standard(2);
    c.bench_function("P^2 <H psi^2>", |b| b.iter(|| descendant_invariant_pn(2, 1, &[(2, 1)], None, &w2).unwrap()));
    let w4 = TorusWeights::standard(4);
    let tw = TwistSpec::new(-5, TwistSign::Minus);
    c.bench_function("P^4 O(-5) two markings", |b| {
        b.iter(|| descendant_invariant_pn(4, 1, &[(1, 2), (0, 3)], Some(&tw), &w4).unwrap())
    });
    c.bench_function("fixed graphs P^4 d=2 n=2", |b| b.iter(|| enumerate_fixed_graphs(4, 2, 2).unwrap()));
}

criterion_group!(benches, series, generating_functions, hypertails, localization);
criterion_main!(benches);
