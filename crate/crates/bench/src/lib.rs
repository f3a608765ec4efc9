//! Benchmarks for `dpl-core` live in `benches/`; run them with
//! `cargo bench -p dpl-bench`.
