//! Kernel timings on a one-thread rayon pool versus the default pool.
//! Build with `--no-default-features` for the sequential code path.

use std::hint::black_box;

use coarsedeg::cfpp::{parse_radii, search_witness};
use coarsedeg::degree::{degree, pushforward};
use coarsedeg::homotopy::triangle_bound_check;
use coarsedeg::lattice::{fundamental_cycle, Window};
use coarsedeg::maps::{parse_map, vertex_map, MapSpec};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::{ThreadPool, ThreadPoolBuilder};

fn pools() -> Vec<(String, ThreadPool)> {
    let all = rayon::current_num_threads();
    let mut out = vec![("1-thread".to_string(), ThreadPoolBuilder::new().num_threads(1).build().unwrap())];
    if all > 1 {
        out.push((format!("{all}-threads"), ThreadPoolBuilder::new().num_threads(all).build().unwrap()));
    }
    out
}

fn bench_degree(c: &mut Criterion) {
    let mut g = c.benchmark_group("degree");
    g.sample_size(10);
    let m = MapSpec::reflection(3, 0).unwrap();
    let w = Window::new(3, 6);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::new("reflect-n3-L6", &name), |b| {
            b.iter(|| pool.install(|| degree(black_box(&m), &w, 16, 0).unwrap()))
        });
    }
    g.finish();
}

fn bench_pushforward(c: &mut Criterion) {
    let mut g = c.benchmark_group("pushforward");
    g.sample_size(10);
    let m = parse_map("rotate(0.3)", 3).unwrap();
    let z = fundamental_cycle(&Window::new(3, 8)).unwrap();
    let vm = vertex_map(&m, 1.0);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::new("rotate-n3-L8", &name), |b| {
            b.iter(|| pool.install(|| pushforward(black_box(&z), |v| vm.apply(v)).unwrap()))
        });
    }
    g.finish();
}

fn bench_triangle(c: &mut Criterion) {
    let mut g = c.benchmark_group("triangle_bound");
    g.sample_size(10);
    let h = parse_map("translate(5,0)", 2).unwrap();
    let w = Window::new(2, 32);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::new("translate-1e4", &name), |b| {
            b.iter(|| pool.install(|| triangle_bound_check(black_box(&h), 1.0, &w, 10_000, 0).unwrap()))
        });
    }
    g.finish();
}

fn bench_search(c: &mut Criterion) {
    let mut g = c.benchmark_group("search_witness");
    g.sample_size(10);
    let m = parse_map("rotate(1.5708)", 2).unwrap();
    let radii = parse_radii("10:200:10").unwrap();
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::new("rotation-256", &name), |b| {
            b.iter(|| pool.install(|| search_witness(black_box(&m), 10.0, &radii, 256, 0, false).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(kernels, bench_degree, bench_pushforward, bench_triangle, bench_search);
criterion_main!(kernels);
