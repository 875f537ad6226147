use criterion::{black_box, criterion_group, criterion_main, Criterion};

use factx_bench::rng;
use factx_core::partition::{common_companion, count_equal_coarsenings, enumerate_companions};
use factx_core::slab27::{random_permuting_smalls, random_small};

fn bench_lattice_ops(c: &mut Criterion) {
    let mut r = rng(1);
    let (a, b) = random_permuting_smalls(&mut r);
    let (p, q) = (a.partition().clone(), b.partition().clone());
    c.bench_function("meet_27", |bench| {
        bench.iter(|| black_box(&p).meet(black_box(&q)).unwrap())
    });
    c.bench_function("join_27", |bench| {
        bench.iter(|| black_box(&p).join(black_box(&q)).unwrap())
    });
    c.bench_function("permutes_27", |bench| {
        bench.iter(|| black_box(&p).permutes(black_box(&q)).unwrap())
    });
    c.bench_function("coarsenings_small_27", |bench| {
        bench.iter(|| count_equal_coarsenings(black_box(&p), 3))
    });
}

fn bench_companions(c: &mut Criterion) {
    let mut r = rng(2);
    let p = random_small(&mut r).into_partition();
    c.bench_function("companion_stream_first_1000", |bench| {
        bench.iter(|| {
            enumerate_companions(black_box(&p))
                .unwrap()
                .take(1000)
                .count()
        })
    });
    let (a, b) = random_permuting_smalls(&mut r);
    c.bench_function("common_companion_27", |bench| {
        bench.iter(|| common_companion(black_box(a.partition()), black_box(b.partition())).unwrap())
    });
}

criterion_group!(benches, bench_lattice_ops, bench_companions);
criterion_main!(benches);
