//! Benchmark harness behind the `sketchlab` binary: argument parsing, seeded
//! trial runs with CSV output, and the acceptance checks run by `selftest`.

pub mod args;
pub mod bench;
pub mod selftest;
