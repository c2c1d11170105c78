use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use siftless_core::{simulate, ProtocolParams, SimulationConfig};

fn montecarlo(c: &mut Criterion) {
    let pulses = 1_000_000;
    let params = ProtocolParams::new(4, 0.1, 0.5, 0.0).unwrap();
    let config = SimulationConfig::new(params, pulses, 1).unwrap();
    let mut group = c.benchmark_group("simulate");
    group.throughput(Throughput::Elements(pulses));
    group.sample_size(20);
    group.bench_function("m4_1e6_pulses", |b| {
        b.iter(|| simulate(black_box(&config)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, montecarlo);
criterion_main!(benches);
