//! Criterion benchmarks for the `nsmo-core` kernels live in `benches/`.
