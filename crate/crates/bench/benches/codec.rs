use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polarmem_core::construction::{bec_reliabilities, design_bec_spec};
use polarmem_core::decoder::DecoderWorkspace;
use polarmem_core::encoder::{build_generator, encode};
use polarmem_core::geometry::code_length;
use polarmem_core::polarization::evolve_ensemble;
use polarmem_core::sim::nearest_level;

/// (m, n) pairs with code length near 1024 for a fair cross-memory shootout.
fn configs() -> Vec<(usize, usize, usize)> {
    [1usize, 2, 4]
        .iter()
        .map(|&m| {
            let (n, len) = nearest_level(m, 1024).unwrap();
            (m, n, len as usize)
        })
        .collect()
}

fn bench_encode(c: &mut Criterion) {
    let mut group = c.benchmark_group("encode");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (m, n, len) in configs() {
        let u: Vec<bool> = (0..len).map(|_| rng.gen()).collect();
        group.throughput(Throughput::Elements(len as u64));
        group.bench_with_input(BenchmarkId::new("network", format!("m{m}_N{len}")), &u, |b, u| {
            b.iter(|| encode(u, n, m).unwrap())
        });
        let g = build_generator(n, m).unwrap();
        group.bench_with_input(BenchmarkId::new("matrix", format!("m{m}_N{len}")), &u, |b, u| {
            b.iter(|| g.mul_vec(u).unwrap())
        });
    }
    group.finish();
}

fn bench_decode(c: &mut Criterion) {
    let mut group = c.benchmark_group("sc_decode");
    group.sample_size(20);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (m, n, len) in configs() {
        let spec = design_bec_spec(m, n, 0.4, len / 2).unwrap();
        let llrs: Vec<f64> = (0..len)
            .map(|_| if rng.gen_bool(0.4) { 0.0 } else { 4.0 * (rng.gen::<f64>() - 0.5).signum() })
            .collect();
        let mut ws = DecoderWorkspace::new(n, m).unwrap();
        group.throughput(Throughput::Elements(len as u64));
        group.bench_function(BenchmarkId::from_parameter(format!("m{m}_N{len}")), |b| {
            b.iter(|| {
                ws.reset();
                ws.decode(&llrs, &spec).unwrap()
            })
        });
    }
    group.finish();
}

fn bench_construction(c: &mut Criterion) {
    let mut group = c.benchmark_group("construction");
    group.sample_size(20);
    for m in [1usize, 2, 4] {
        let (n, len) = nearest_level(m, 4096).unwrap();
        group.bench_function(BenchmarkId::from_parameter(format!("bec_z_m{m}_N{len}")), |b| {
            b.iter(|| bec_reliabilities(n, m, 0.4).unwrap())
        });
    }
    group.finish();
}

fn bench_ensemble(c: &mut Criterion) {
    let mut group = c.benchmark_group("ensemble");
    group.sample_size(10);
    let (n, len) = nearest_level(2, 100_000).unwrap();
    assert_eq!(code_length(n, 2).unwrap(), len);
    group.bench_function(format!("evolve_m2_N{len}"), |b| {
        b.iter(|| evolve_ensemble(n, 2, 0.5).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_encode,
    bench_decode,
    bench_construction,
    bench_ensemble
);
criterion_main!(benches);
