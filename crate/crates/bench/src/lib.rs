//! Benchmarks for the carpet solvers live in `benches/`.
