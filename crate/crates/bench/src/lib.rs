//! Benchmarks for the pricing and filtering kernels live in `benches/`.
