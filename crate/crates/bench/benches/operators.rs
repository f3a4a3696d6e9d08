use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use freeprod::fock::represent_matrix_element;
use freeprod::khintchine::{enclose_norm, iota};
use freeprod::schur::cb_norm;
use freeprod_bench::{dense_symbol, instance, poisson_symbol};

fn representation(c: &mut Criterion) {
    let mut group = c.benchmark_group("represent");
    for (n, d, len) in [(2, 2, 4), (3, 2, 4), (3, 3, 5)] {
        let (x, fock) = instance(n, d, 1, len, 7);
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("N{n}_d{d}_L{len}")),
            &len,
            |b, &len| b.iter(|| represent_matrix_element(&fock, black_box(&x), len).unwrap()),
        );
    }
    group.finish();
}

fn norms(c: &mut Criterion) {
    let mut group = c.benchmark_group("norm");
    group.sample_size(10);
    for (n, d, len) in [(2, 2, 4), (3, 2, 4), (2, 3, 5)] {
        let (x, fock) = instance(n, d, 2, len, 11);
        let op = represent_matrix_element(&fock, &x, len).unwrap();
        group.bench_function(format!("sigma_N{n}_d{d}_L{len}"), |b| b.iter(|| black_box(&op).norm()));
    }
    let (x, fock) = instance(2, 2, 1, 4, 13);
    group.bench_function("enclose_N2_d2_L4", |b| {
        b.iter(|| enclose_norm(black_box(&x), &fock, 4).unwrap())
    });
    group.bench_function("iota_N2_d2", |b| b.iter(|| iota(black_box(&x), &fock).unwrap()));
    group.finish();
}

fn schur(c: &mut Criterion) {
    let mut group = c.benchmark_group("cb_norm");
    group.sample_size(10);
    for m in [4, 8, 16] {
        let a = dense_symbol(m);
        group.bench_with_input(BenchmarkId::new("dense", m), &a, |b, a| {
            b.iter(|| cb_norm(a, 1e-7).unwrap())
        });
    }
    for radius in [1, 2] {
        let a = poisson_symbol(0.7, radius);
        group.bench_with_input(BenchmarkId::new("radial", radius), &a, |b, a| {
            b.iter(|| cb_norm(a, 1e-7).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, representation, norms, schur);
criterion_main!(benches);
