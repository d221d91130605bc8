//! Waiting-time distributions for the generalized coupon collector problem.
//!
//! A set of `n` items is sampled with replacement, each draw landing on item
//! `i` with probability `p_i` (the "popularity", generally non-uniform).
//! This crate computes the distribution of the number of trials needed to
//! collect `c` distinct items — pdf, CDF, CCDF and expectation — by
//! inclusion-exclusion over sums of powers of subset probabilities, and
//! implements the decomposition of those power sums over a binomial basis
//! that both proves the tail is exactly 1 below `c` trials and yields a fast
//! evaluation path for large subset sizes.
//!
//! Everything is generic over the arithmetic backend: exact
//! arbitrary-precision rationals, where every identity is checked to
//! equality, or `f64` with compensated summation and cancellation
//! diagnostics. A Monte Carlo sampler of the same process is included for
//! empirical validation.

pub mod decomposition;
pub mod error;
pub mod numerics;
pub mod popularity;
pub mod power_sums;
pub mod simulator;
pub mod waiting_time;

pub use error::{Error, Result};
pub use numerics::{Backend, Scalar};
pub use popularity::{IndexSet, Popularity};

#[cfg(test)]
mod shareability {
    use super::*;
    use num_rational::BigRational;

    fn assert_send_sync<T: Send + Sync>() {}

    #[test]
    fn immutable_values_are_shareable_across_threads() {
        assert_send_sync::<Popularity<BigRational>>();
        assert_send_sync::<Popularity<f64>>();
        assert_send_sync::<decomposition::DecompositionWeights<BigRational>>();
        assert_send_sync::<decomposition::SmallPowerSums<f64>>();
        assert_send_sync::<waiting_time::WaitingTimeTable<BigRational>>();
        assert_send_sync::<simulator::EmpiricalDistribution>();
    }
}
