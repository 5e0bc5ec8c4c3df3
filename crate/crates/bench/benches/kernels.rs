use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use gprlab_bench::{square_link, upa};
use gprlab_core::channel::channel_threshold;
use gprlab_core::closed_form::erlang_sf;
use gprlab_core::linalg::{add_identity, hermitian_logdet, signal_matrix};
use gprlab_core::solvers::{solve_c_thresholds, solve_nu};
use gprlab_core::{mutual_information, rate_thresholds, sample_channel, McConfig};

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample_channel");
    for n in [2, 4, 8] {
        let p = square_link(n);
        g.throughput(Throughput::Elements((n * n) as u64));
        g.bench_with_input(BenchmarkId::from_parameter(n), &p, |b, p| {
            let mut t = 0u64;
            b.iter(|| {
                t += 1;
                sample_channel(p, 7, black_box(t))
            })
        });
    }
    g.finish();
}

fn logdet(c: &mut Criterion) {
    let mut g = c.benchmark_group("logdet");
    for n in [2, 4, 8] {
        let p = square_link(n);
        let h = sample_channel(&p, 1, 0);
        let (mut m, dim) = signal_matrix(&h, upa(n, 0.1).powers(), p.rho());
        add_identity(&mut m, dim);
        g.bench_with_input(BenchmarkId::new("hermitian", n), &m, |b, m| {
            b.iter(|| hermitian_logdet(black_box(m), dim))
        });
        let alloc = upa(n, 0.1);
        g.bench_with_input(BenchmarkId::new("mutual_information", n), &h, |b, h| {
            b.iter(|| mutual_information(black_box(h), &alloc, &p))
        });
    }
    g.finish();
}

fn thresholds(c: &mut Criterion) {
    let mut g = c.benchmark_group("rate_threshold");
    for n in [1, 2, 4, 8] {
        let p = square_link(n);
        let h = sample_channel(&p, 2, 0);
        let shape = vec![1.0; n];
        g.bench_with_input(BenchmarkId::new("per_channel", n), &h, |b, h| {
            b.iter(|| channel_threshold(black_box(h), &shape, p.rho(), p.rate()))
        });
    }
    g.sample_size(10);
    let cfg = McConfig::new(3, 10_000).expect("valid config");
    for n in [2, 4] {
        let p = square_link(n);
        g.throughput(Throughput::Elements(cfg.trials));
        g.bench_function(BenchmarkId::new("batch_10k", n), |b| {
            b.iter(|| rate_thresholds(&vec![1.0; n], &p, &cfg))
        });
    }
    g.finish();
}

fn special_functions(c: &mut Criterion) {
    let mut g = c.benchmark_group("erlang_sf");
    for (k, x) in [(2, 1.5), (16, 12.0), (400, 710.0)] {
        g.bench_function(BenchmarkId::new(format!("k{k}"), x), |b| {
            b.iter(|| erlang_sf(black_box(k), black_box(x)))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("roots");
    for n in [2, 8, 16] {
        g.bench_with_input(BenchmarkId::new("nu", n), &n, |b, &n| {
            b.iter(|| solve_nu(black_box(n)))
        });
    }
    // thresholds are cached after the first call, so this measures lookup
    g.bench_function("c_thresholds_8", |b| {
        b.iter(|| solve_c_thresholds(black_box(8)))
    });
    g.finish();
}

criterion_group!(benches, sampling, logdet, thresholds, special_functions);
criterion_main!(benches);
