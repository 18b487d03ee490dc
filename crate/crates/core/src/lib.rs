//! Essential spectrum of singular 2×2 block Sturm–Liouville operators.
//!
//! The crate is `no_std` (with `alloc`): everything here is pure numerics.
//! File formats, the CLI and parallel orchestration live in the `esspec` crate.
#![no_std]
// `!(x > 0.0)` is deliberate: it rejects NaN along with the rest.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod applications;
pub mod asymptotics;
pub mod coefficients;
pub mod exprlang;
pub mod interval;
pub mod schur;
pub mod spectrum;
pub mod validate;

pub use num_complex::Complex64;

pub use coefficients::{
    transform_to_half_line, HalfLineProblem, ProblemError, UnitIntervalProblem,
};
pub use exprlang::Expr;
pub use interval::{Interval, IntervalSet};
pub use spectrum::{
    analyze_half_line, analyze_unit_direct, analyze_unit_transformed, AnalysisOptions, Executor,
    Route, Sequential, SpectrumReport,
};
