//! Criterion benchmarks for the solver, transport and checker hot paths; see `benches/`.
