//! Benchmark-only package; the benches live under `benches/`.
