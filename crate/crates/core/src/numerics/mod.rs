//! Exact and floating-point scalar arithmetic plus cached combinatorial
//! primitives.

mod combinatorics;
mod scalar;

pub use combinatorics::{binomial, factorial, stirling2, stirling2_rolling, BinomialTable};
pub use scalar::{
    decimal_string, Accumulator, Backend, CompensatedSum, ExactSum, Scalar,
    CANCELLATION_WARN_CONDITION,
};
