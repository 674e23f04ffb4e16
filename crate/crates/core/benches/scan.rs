//! Contingency scan throughput: sequential fallback vs the rayon path.
//!
//! Build with `--no-default-features` to see the sequential-only binary; both
//! groups then measure the same code.

use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tntc::acpf::{PowerFlow, SolverParams};
use tntc::network::{parse_case, NetworkCase, TopologyMask};
use tntc::par::ALL_CORES;
use tntc::rtca::{build_contingency_list, run_rtca};

fn load(name: &str) -> NetworkCase {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name);
    parse_case(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn scan(c: &mut Criterion) {
    let params = SolverParams::default();
    let mut group = c.benchmark_group("rtca");
    group.sample_size(10);
    // full 24-bus scan, and the first 64 outages of the 2383-bus case
    for (name, limit) in [("rts24_revised.m", usize::MAX), ("case2383wp.m", 64)] {
        let case = load(name);
        let base = PowerFlow::new(&case).solve(&TopologyMask::empty(), None, &params).unwrap();
        let list: Vec<_> = build_contingency_list(&case).into_iter().take(limit).collect();
        for (label, workers) in [("sequential", 1), ("parallel", ALL_CORES)] {
            group.bench_with_input(BenchmarkId::new(label, name), &workers, |b, &w| {
                b.iter(|| run_rtca(&case, &list, &base, &params, w).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, scan);
criterion_main!(benches);
