use std::hint::black_box;

use colsubset_core::selectors::{
    select_exact, select_exact_with, select_greedy_forward, select_greedy_frobenius,
    select_local_swap_volume,
};
use colsubset_core::verification::random_gaussian;
use colsubset_core::x3c::{generate_false, reduce};
use colsubset_core::{CriterionKind, CriterionSpec, DenseMatrix, ExactOptions};
use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn gaussian(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    random_gaussian(&mut ChaCha8Rng::seed_from_u64(seed), rows, cols)
}

fn exact(c: &mut Criterion) {
    let a = gaussian(20, 20, 1);
    let vol = CriterionSpec::simple(CriterionKind::Volume);
    let mut group = c.benchmark_group("select_exact_n20_k6");
    group.sample_size(10);
    group.bench_function("volume_1_thread", |b| {
        b.iter(|| select_exact(black_box(&a), 6, &vol).unwrap())
    });
    group.bench_function("volume_4_threads", |b| {
        let opts = ExactOptions::with_threads(4);
        b.iter(|| select_exact_with(black_box(&a), 6, &vol, &opts).unwrap())
    });
    let cond = CriterionSpec::simple(CriterionKind::CondTwo);
    group.bench_function("cond_two_1_thread", |b| {
        b.iter(|| select_exact(black_box(&a), 6, &cond).unwrap())
    });
    group.finish();
}

fn heuristics(c: &mut Criterion) {
    let a = gaussian(40, 200, 2);
    let vol = CriterionSpec::simple(CriterionKind::Volume);
    c.bench_function("greedy_frobenius_200x40_k10", |b| {
        b.iter(|| select_greedy_frobenius(black_box(&a), 10).unwrap())
    });
    c.bench_function("greedy_forward_volume_200x40_k10", |b| {
        b.iter(|| select_greedy_forward(black_box(&a), 10, &vol).unwrap())
    });
    let mut group = c.benchmark_group("local_swap");
    group.sample_size(10);
    group.bench_function("volume_200x40_k10", |b| {
        b.iter(|| select_local_swap_volume(black_box(&a), 10, 3, 20).unwrap())
    });
    group.finish();
}

fn reduction(c: &mut Criterion) {
    let inst = generate_false(4, 12, 5).unwrap();
    let a = reduce(&inst).matrix;
    let rvol = CriterionSpec::simple(CriterionKind::RelativeVolume);
    c.bench_function("x3c_reduction_m4_n12_rvol", |b| {
        b.iter(|| select_exact(black_box(&a), 4, &rvol).unwrap())
    });
}

criterion_group!(benches, exact, heuristics, reduction);
criterion_main!(benches);
