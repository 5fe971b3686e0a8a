use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use supercong::bernoulli::BernoulliCache;
use supercong::congruences::{verify_range, ParamPolicy, StatementId, VerifyOptions};
use supercong::fracbinom::{family_terms, RationalBinomStream};
use supercong::scanners::{composite_point, scan_conj_1_1, Conj11Grid, Family};
use supercong::seqsums::{elem_sym, harmonic};
use supercong::PrimePowerModulus;
use supercong_bench::PRIMES;

fn tables(c: &mut Criterion) {
    let mut g = c.benchmark_group("tables");
    for p in PRIMES {
        let ring = PrimePowerModulus::new(p, 6).unwrap();
        g.bench_with_input(BenchmarkId::new("harmonic_order2", p), &p, |b, &p| {
            b.iter(|| harmonic(black_box(p - 1), 2, &ring).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("elem_sym_deg4", p), &p, |b, &p| {
            b.iter(|| elem_sym(4, black_box(p - 1), &ring).unwrap())
        });
    }
    g.finish();
}

fn binomials(c: &mut Criterion) {
    let mut g = c.benchmark_group("binomials");
    for p in PRIMES {
        g.bench_with_input(BenchmarkId::new("family_terms_m3", p), &p, |b, &p| {
            b.iter(|| family_terms(p, 3, p - 1, 4).unwrap().count())
        });
        let ring = PrimePowerModulus::new(p, 5).unwrap();
        g.bench_with_input(BenchmarkId::new("factor_stream", p), &p, |b, &p| {
            b.iter(|| {
                RationalBinomStream::new(-1, p + 1, &ring)
                    .unwrap()
                    .take(4 * p as usize)
                    .last()
            })
        });
    }
    g.finish();
}

fn bernoulli(c: &mut Criterion) {
    c.bench_function("bernoulli_to_500", |b| {
        b.iter(|| {
            let cache = BernoulliCache::new(500);
            cache.ensure(black_box(500)).unwrap();
            cache
        })
    });
}

fn suites(c: &mut Criterion) {
    let mut g = c.benchmark_group("suites");
    g.sample_size(10);
    for p in PRIMES {
        g.bench_with_input(BenchmarkId::new("all_statements", p), &p, |b, &p| {
            let opts = VerifyOptions::with_guard(2);
            b.iter(|| verify_range(StatementId::ALL, &[p], &ParamPolicy::default(), &opts).unwrap())
        });
    }
    g.bench_function("conj1_1_p7_plus", |b| {
        let points = Conj11Grid::standard(7).points(7);
        b.iter(|| scan_conj_1_1(7, Family::PlusOne, &points, 2).unwrap())
    });
    g.bench_function("composite_n100_plus", |b| {
        b.iter(|| composite_point(black_box(100), Family::PlusOne).unwrap())
    });
    g.finish();
}

criterion_group!(benches, tables, binomials, bernoulli, suites);
criterion_main!(benches);
