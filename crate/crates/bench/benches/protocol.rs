use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use jplt::audit::{verify_structural, AuditLimits};
use jplt::protocol::Mode;
use jplt::{build_query, recover, server_answer};
use jplt_bench::instance;

const P: u64 = 65537;

fn bench_build_query(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_query");
    // Generic mode certifies H by checking every maximal minor, which caps it near K = 20.
    let shapes = [
        (10, 5, 2, Mode::Grs),
        (10, 5, 2, Mode::Generic),
        (16, 8, 3, Mode::Grs),
        (16, 8, 3, Mode::Generic),
    ];
    let large = [(32, 16, 4, Mode::Grs), (64, 32, 8, Mode::Grs)];
    for (k, d, l, mode) in shapes.into_iter().chain(large) {
        {
            let (demand, key, _) = instance(P, 1, k, d, l, mode, 1);
            let id = BenchmarkId::new(mode.to_string(), format!("K{k}-D{d}-L{l}"));
            group.bench_with_input(id, &(demand, key), |b, (demand, key)| {
                b.iter(|| build_query(black_box(demand), black_box(key), mode).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_answer_and_recover(c: &mut Criterion) {
    let mut group = c.benchmark_group("answer");
    for m in [64, 1024] {
        let (demand, key, data) = instance(P, m, 32, 16, 4, Mode::Grs, 2);
        let (query, plan) = build_query(&demand, &key, Mode::Grs).unwrap();
        group.bench_function(BenchmarkId::new("server_answer", m), |b| {
            b.iter(|| server_answer(black_box(&query), black_box(&data)).unwrap())
        });
        let answer = server_answer(&query, &data).unwrap();
        group.bench_function(BenchmarkId::new("recover", m), |b| {
            b.iter(|| recover(black_box(&answer), black_box(&plan)).unwrap())
        });
    }
    group.finish();
}

fn bench_audit(c: &mut Criterion) {
    let mut group = c.benchmark_group("audit");
    group.sample_size(10);
    let (demand, key, _) = instance(P, 1, 10, 5, 2, Mode::Grs, 3);
    let (query, _) = build_query(&demand, &key, Mode::Grs).unwrap();
    let limits = AuditLimits::default();
    group.bench_function("is_mds K10", |b| {
        b.iter(|| black_box(&query.generator).is_mds().unwrap())
    });
    group.bench_function("verify_structural K10-D5-L2", |b| {
        b.iter(|| verify_structural(black_box(&query.generator), 5, 2, true, &limits).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_build_query, bench_answer_and_recover, bench_audit);
criterion_main!(benches);
