//! Benchmark-only crate; see `benches/segmentation.rs`.
