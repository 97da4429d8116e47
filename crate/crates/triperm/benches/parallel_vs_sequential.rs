//! Data-parallel hot paths against their sequential fallbacks.
//!
//! The `parallel` feature compiles the rayon paths in; the runtime override
//! lets one binary measure both modes. Build with `--no-default-features` to
//! confirm the sequential-only build matches the overridden numbers.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use triperm::canonical::{canonical_a, canonical_b};
use triperm::classes::{check_membership, collect_forbidden, ClassDescriptor, ConstraintId};
use triperm::exec;
use triperm::gadgets::{build_gadget_family, Variant};
use triperm::jep::{brute_force_jep, BruteMode};
use triperm::matcher::avoids_all;
use triperm::semantics::detect_copies;
use triperm::structure::MultiPerm;
use triperm::tiling::StringTilingProblem;

fn descriptor() -> ClassDescriptor {
    ClassDescriptor {
        variant: Variant::P,
        gadgets: build_gadget_family(Variant::P, 7, 0).unwrap(),
        problem: StringTilingProblem::isolated_two_example(),
    }
}

fn modes() -> [(&'static str, bool); 2] {
    [("parallel", false), ("sequential", true)]
}

fn bench_detect_copies(c: &mut Criterion) {
    let d = descriptor();
    let build = canonical_a(3, &d.gadgets).unwrap();
    let mut group = c.benchmark_group("detect_copies/canonical_a3");
    for (name, seq) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            exec::set_sequential_override(seq);
            b.iter(|| detect_copies(&build.structure, &d.gadgets, 200_000).unwrap());
        });
    }
    exec::set_sequential_override(false);
    group.finish();
}

fn bench_membership(c: &mut Criterion) {
    let d = descriptor();
    let build = canonical_b(2, &d.gadgets).unwrap();
    let mut group = c.benchmark_group("check_membership/canonical_b2");
    for (name, seq) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            exec::set_sequential_override(seq);
            b.iter(|| check_membership(&build.structure, &d).unwrap());
        });
    }
    exec::set_sequential_override(false);
    group.finish();
}

fn bench_avoidance(c: &mut Criterion) {
    let d = descriptor();
    let patterns = collect_forbidden(
        &d,
        &[ConstraintId::C2, ConstraintId::C6].into_iter().collect(),
        15,
    )
    .unwrap();
    // A host that avoids everything, so the scan runs to completion.
    let host = canonical_a(1, &d.gadgets).unwrap().structure;
    let mut group = c.benchmark_group("avoids_all/21k_patterns");
    for (name, seq) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            exec::set_sequential_override(seq);
            b.iter(|| avoids_all(&host, &patterns).unwrap());
        });
    }
    exec::set_sequential_override(false);
    group.finish();
}

fn bench_brute_force(c: &mut Criterion) {
    let d = descriptor();
    let a = MultiPerm::from_rank_rows(vec![vec![0, 1, 0], vec![1, 0, 1], vec![2, 2, 2]]).unwrap();
    let b = MultiPerm::from_rank_rows(vec![vec![0, 2, 1], vec![1, 0, 2], vec![2, 1, 0]]).unwrap();
    let mut group = c.benchmark_group("brute_force_jep/3+3_identify");
    for (name, seq) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |bch| {
            exec::set_sequential_override(seq);
            bch.iter(|| brute_force_jep(&a, &b, &d, BruteMode::Identify, 10).unwrap());
        });
    }
    exec::set_sequential_override(false);
    group.finish();
}

criterion_group!(
    benches,
    bench_detect_copies,
    bench_membership,
    bench_avoidance,
    bench_brute_force
);
criterion_main!(benches);
