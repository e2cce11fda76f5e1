//! Shared inputs for the kernel benchmarks.

pub use gwlocal_core;
