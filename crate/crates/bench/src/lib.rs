//! Criterion benchmarks for the evacuation engine; see `benches/`.
