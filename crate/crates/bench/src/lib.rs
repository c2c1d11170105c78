//! Criterion benchmarks for the sifting-less QKD toolkit live in `benches/`.
