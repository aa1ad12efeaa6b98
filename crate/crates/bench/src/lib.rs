//! Criterion benchmarks for orc-core live in `benches/`.
