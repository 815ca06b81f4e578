//! Criterion benchmarks for `cfdim-core` live in `benches/`; this crate has no code of its own.
