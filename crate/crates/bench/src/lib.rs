//! Criterion benchmarks for `winplan-core`; see `benches/`.
