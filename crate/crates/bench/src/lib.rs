// SPDX-License-Identifier: Apache-2.0

//! Benchmarks for the hot kernels of `basin_lab`. See `benches/kernels.rs`.

pub use basin_lab;
