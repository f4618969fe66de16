use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ifsproj_bench::test_matrix;
use ifsproj_core::estimation::box_dim_default;
use ifsproj_core::group::closure_of;
use ifsproj_core::{fixtures, sample_attractor, sim_dim_ssifs, spectral_radius, SamplingMethod};

fn sim_dim(c: &mut Criterion) {
    let ifs = fixtures::sierpinski_half().ifs;
    c.bench_function("sim_dim_ssifs/sierpinski", |b| b.iter(|| sim_dim_ssifs(black_box(&ifs)).unwrap()));
}

fn radius(c: &mut Criterion) {
    let mut g = c.benchmark_group("spectral_radius");
    for q in [4, 16, 64] {
        let a = test_matrix(q);
        g.bench_with_input(BenchmarkId::from_parameter(q), &a, |b, a| b.iter(|| spectral_radius(a).unwrap()));
    }
    g.finish();
}

fn closure(c: &mut Criterion) {
    let gens = fixtures::example_7_5_plane().ifs.rotations();
    c.bench_function("closure/order_8", |b| b.iter(|| closure_of(black_box(&gens)).unwrap()));
}

fn sampling(c: &mut Criterion) {
    let ifs = fixtures::irrational_rotation_planar().ifs;
    let mut g = c.benchmark_group("sample_attractor");
    g.sample_size(20);
    g.bench_function("chaos_100k", |b| {
        b.iter(|| sample_attractor(&ifs, 100_000, 7, SamplingMethod::chaos_uniform()).unwrap())
    });
    g.finish();
}

fn box_counting(c: &mut Criterion) {
    let ifs = fixtures::sierpinski_half().ifs;
    let cloud = sample_attractor(&ifs, 200_000, 7, SamplingMethod::chaos_uniform()).unwrap();
    let mut g = c.benchmark_group("box_dim");
    g.sample_size(20);
    g.bench_function("sierpinski_200k", |b| b.iter(|| box_dim_default(black_box(&cloud)).unwrap()));
    g.finish();
}

criterion_group!(kernels, sim_dim, radius, closure, sampling, box_counting);
criterion_main!(kernels);
