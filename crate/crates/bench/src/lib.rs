//! Criterion benchmarks for `colsubset-core`; see `benches/`.
