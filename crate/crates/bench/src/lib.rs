//! Benchmarks for the workbench engine live in `benches/`.
