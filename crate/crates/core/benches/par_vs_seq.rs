//! Parallel term evaluation against the sequential fallback. Both paths
//! produce bit-identical matrices; these benches measure the speedup on
//! workloads large enough for the thread pool to pay off.
//!
//! Build with `--no-default-features` to measure the pure sequential build
//! (both entry points then run the same code).

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use spectracalc::calculus::{self, SeriesEval, SeriesFunction};
use spectracalc::jordan::{EigenGroup, JordanSpec, SpectralFamily};
use spectracalc::sample;
use spectracalc::scalar::{Scalar, Tolerance};
use spectracalc::MatrixC;

fn tol() -> Tolerance {
    Tolerance::default()
}

/// Family with many blocks at the given dimension: groups of [2, 1, 1]
/// blocks with well-separated eigenvalues.
fn big_family(dim: usize, seed: u64) -> (JordanSpec, SpectralFamily) {
    assert_eq!(dim % 4, 0);
    let groups: Vec<EigenGroup> = (0..dim / 4)
        .map(|k| {
            let angle = k as f64 * 0.7;
            EigenGroup::new(
                Scalar::float(0.8 * angle.cos(), 0.8 * angle.sin()),
                vec![2, 1, 1],
            )
        })
        .collect();
    let spec = JordanSpec::new(sample::seeded_transform(dim, seed), groups, &tol()).unwrap();
    let family = spec.extract_family(&tol()).unwrap();
    (spec, family)
}

fn bench_apply_single(c: &mut Criterion) {
    let (_, family) = big_family(64, 7);
    let f = SeriesFunction::exp();
    let opts = SeriesEval::default();

    let par = calculus::apply_single(&f, &family, &opts).unwrap();
    let seq = calculus::apply_single_seq(&f, &family, &opts).unwrap();
    assert_eq!(par, seq, "parallel and sequential paths must agree bitwise");

    let mut group = c.benchmark_group("apply_single_dim64");
    group.sample_size(20);
    group.bench_function("parallel", |b| {
        b.iter(|| calculus::apply_single(black_box(&f), black_box(&family), &opts).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| calculus::apply_single_seq(black_box(&f), black_box(&family), &opts).unwrap())
    });
    group.finish();
}

fn bench_series_oracle(c: &mut Criterion) {
    // Two-variable oracle: every term multiplies precomputed powers, so the
    // term map carries real work (the univariate oracle is dominated by its
    // inherently sequential power chain instead).
    let (s1, _) = big_family(24, 11);
    let (s2, _) = big_family(24, 12);
    let mats = [s1.assemble(&tol()).unwrap(), s2.assemble(&tol()).unwrap()];
    let f = SeriesFunction::exp_sum_truncated(2, 12);
    let opts = SeriesEval::default();

    let par = calculus::series_oracle(&f, &mats, 12, &opts).unwrap();
    let seq = calculus::series_oracle_seq(&f, &mats, 12, &opts).unwrap();
    assert_eq!(par, seq);

    let mut group = c.benchmark_group("series_oracle_two_var_dim24_deg12");
    group.sample_size(20);
    group.bench_function("parallel", |b| {
        b.iter(|| calculus::series_oracle(black_box(&f), black_box(&mats), 12, &opts).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            calculus::series_oracle_seq(black_box(&f), black_box(&mats), 12, &opts).unwrap()
        })
    });
    group.finish();
}

fn bench_apply_two(c: &mut Criterion) {
    let (_, fam1) = big_family(16, 21);
    let (_, fam2) = big_family(16, 22);
    let f = SeriesFunction::exp_sum_truncated(2, 10);
    let opts = SeriesEval::default();

    let par = calculus::apply_two(&f, &fam1, &fam2, &opts).unwrap();
    let seq = calculus::apply_two_seq(&f, &fam1, &fam2, &opts).unwrap();
    assert_eq!(par, seq);

    let mut group = c.benchmark_group("apply_two_dim16");
    group.sample_size(15);
    group.bench_function("parallel", |b| {
        b.iter(|| {
            calculus::apply_two(black_box(&f), black_box(&fam1), black_box(&fam2), &opts).unwrap()
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            calculus::apply_two_seq(black_box(&f), black_box(&fam1), black_box(&fam2), &opts)
                .unwrap()
        })
    });
    group.finish();
}

fn bench_matrix_product(c: &mut Criterion) {
    // Baseline scalar-path cost for context.
    let a = sample::seeded_transform(64, 31);
    let b = sample::seeded_transform(64, 32);
    let mut group = c.benchmark_group("mat_mul_dim64");
    group.sample_size(30);
    group.bench_function("single", |bch| {
        bch.iter(|| black_box(&a).mat_mul(black_box(&b)).unwrap())
    });
    group.finish();
    let _: &MatrixC = &a;
}

criterion_group!(
    benches,
    bench_apply_single,
    bench_series_oracle,
    bench_apply_two,
    bench_matrix_product
);
criterion_main!(benches);
