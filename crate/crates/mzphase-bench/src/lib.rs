//! Criterion benchmarks for the phase-estimation toolkit live in `benches/`;
//! this crate has no library surface of its own.
