//! Criterion benchmarks for `seqzap-core`; see `benches/`.
