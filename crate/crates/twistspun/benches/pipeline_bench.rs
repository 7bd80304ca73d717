//! Criterion benchmarks comparing the parallel and sequential execution
//! paths of the pipeline's heavy stages. Filled in alongside the
//! projection module.

fn main() {}
