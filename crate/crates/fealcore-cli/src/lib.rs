//! Library surface of the command line driver: benchmark problem
//! definitions, the convergence-study harness, and file exporters.

// index loops co-address coordinate and coefficient buffers throughout
#![allow(clippy::needless_range_loop)]

pub mod mtx;
pub mod problems;
pub mod study;
pub mod vtk;
