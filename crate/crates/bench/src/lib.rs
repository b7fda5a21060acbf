//! Benchmarks only; see `benches/`.

pub use quadnil_core as core;
