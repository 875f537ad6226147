use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::Rng;

use factx_bench::rng;
use factx_core::autom::PointPermutation;
use factx_core::exact::bareiss_determinant;
use factx_core::req27::end_to_end_roundtrip;
use factx_core::slab27::{build_slab, build_z, random_permuting_smalls};
use factx_core::states::solve_states;
use factx_core::vecfact::fact_v_structure;

fn bench_slabs(c: &mut Criterion) {
    let mut r = rng(3);
    let (a, b) = random_permuting_smalls(&mut r);
    c.bench_function("build_slab", |bench| {
        bench.iter(|| build_slab(black_box(&a), black_box(&b)).unwrap())
    });
    c.bench_function("build_z", |bench| {
        bench.iter(|| build_z(black_box(&a), black_box(&b)).unwrap())
    });
}

fn bench_solvers(c: &mut Criterion) {
    let mut r = rng(4);
    let rows: Vec<Vec<num_bigint::BigInt>> = (0..60)
        .map(|_| (0..60).map(|_| num_bigint::BigInt::from(r.gen_range(0..=1))).collect())
        .collect();
    c.bench_function("bareiss_det_60", |bench| {
        bench.iter(|| bareiss_determinant(black_box(rows.clone())))
    });
    let z33 = fact_v_structure(3, 3).unwrap();
    c.bench_function("states_z33", |bench| {
        bench.iter(|| solve_states(black_box(&z33)))
    });
}

fn bench_roundtrip(c: &mut Criterion) {
    let mut r = rng(5);
    let alpha = PointPermutation::random(27, &mut r);
    let mut group = c.benchmark_group("roundtrip");
    group.sample_size(10);
    group.bench_function("end_to_end_27", |bench| {
        bench.iter(|| end_to_end_roundtrip(black_box(&alpha)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_slabs, bench_solvers, bench_roundtrip);
criterion_main!(benches);
