//! Criterion benchmarks for the `mchi-core` kernels; see `benches/kernels.rs`.
