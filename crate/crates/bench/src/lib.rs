//! Criterion benchmarks for `charex-core`; see `benches/`.
