//! Criterion benchmarks for martlab live in `benches/`; run them with
//! `cargo bench -p martlab-bench`.
