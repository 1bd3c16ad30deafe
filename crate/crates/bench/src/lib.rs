//! Criterion benchmarks for the ltperiod kernels live in benches/.
