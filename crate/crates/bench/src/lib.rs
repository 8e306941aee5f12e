//! Criterion benchmarks for `eamt-core`; see `benches/`.
