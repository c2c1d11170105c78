use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use siftless_core::{holevo_pns, rho_conditioned, von_neumann_entropy, LumpedBinomialTable};

fn states(c: &mut Criterion) {
    let mut group = c.benchmark_group("holevo_pns");
    for (n, m) in [(2, 4), (10, 8), (30, 16)] {
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("n{n}_m{m}")),
            &(n, m),
            |b, &(n, m)| b.iter(|| holevo_pns(black_box(n), black_box(m)).unwrap()),
        );
    }
    group.finish();

    c.bench_function("entropy_n20_m12", |b| {
        let rho = rho_conditioned(3, 20, 12).unwrap();
        b.iter(|| von_neumann_entropy(black_box(&rho)).unwrap())
    });
    c.bench_function("lumped_binomial_table_m16_n127", |b| {
        b.iter(|| LumpedBinomialTable::new(black_box(16), black_box(127)).unwrap())
    });
}

criterion_group!(benches, states);
criterion_main!(benches);
