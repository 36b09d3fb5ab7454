//! Criterion benchmarks for memcons-core; see `benches/`.
