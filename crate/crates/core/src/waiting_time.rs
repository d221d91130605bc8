//! Waiting-time distribution of the coupon collector: the number of
//! i.i.d. trials needed before `c` of the `n` items have been seen.
//!
//! The pdf, CDF and CCDF come from inclusion-exclusion over subset power
//! sums; the tail takes the form
//! `Pr[T_c > k] = sum_{j=0}^{c-1} (-1)^(c-1-j) C(n-j-1, n-c) sum_{|J|=j} P_J^k`
//! and equals 1 exactly for every `k < c`. Uniform popularities additionally
//! admit an exact Stirling-number pdf and closed inner sums; both routes are
//! exposed and tested against each other.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::decomposition::power_sum_guarded;
use crate::error::{Error, Result};
use crate::numerics::{
    binomial, factorial, stirling2_rolling, Accumulator, Backend, Scalar,
    CANCELLATION_WARN_CONDITION,
};
use crate::popularity::{
    check_enumeration_guard, fold_subset_aggregates, Popularity, DEFAULT_ENUMERATION_GUARD,
};
use crate::power_sums::{power_sum_with_complement_guarded, power_sums_through_k_guarded};

fn check_collection_size(c: usize, n: usize) -> Result<()> {
    if c < 1 || c > n {
        return Err(Error::Range(format!(
            "collection size must satisfy 1 <= c <= n, got c = {c}, n = {n}"
        )));
    }
    Ok(())
}

fn exponent(k: u64) -> Result<u32> {
    u32::try_from(k).map_err(|_| Error::Range(format!("trial count {k} is out of range")))
}

/// `sum_{|J|=j} P_J^k` as needed by the tail sum: closed form for uniform
/// popularities, otherwise brute force below `j = k` and the small-sum
/// reduction above it.
fn tail_inner_sum<S: Scalar>(pop: &Popularity<S>, j: usize, k: u32, guard: u64) -> Result<S> {
    if pop.is_uniform() {
        let n = pop.n();
        let ratio = S::from_int(j as i64) / S::from_int(n as i64);
        return Ok(S::from_bigint(&binomial(n as i64, j as i64)) * ratio.power(k));
    }
    power_sum_guarded(pop, j, k, guard)
}

/// The `c` signed outer terms of the tail sum `Pr[T_c > k]`, index
/// `j = 0..c-1`. Summing them gives the CCDF; keeping them separate lets
/// callers estimate cancellation and re-sum under permutations.
pub fn ccdf_terms<S: Scalar>(pop: &Popularity<S>, c: usize, k: u64) -> Result<Vec<S>> {
    ccdf_terms_guarded(pop, c, k, DEFAULT_ENUMERATION_GUARD)
}

pub fn ccdf_terms_guarded<S: Scalar>(
    pop: &Popularity<S>,
    c: usize,
    k: u64,
    guard: u64,
) -> Result<Vec<S>> {
    let n = pop.n();
    check_collection_size(c, n)?;
    let k = exponent(k)?;
    let mut terms = Vec::with_capacity(c);
    for j in 0..c {
        let coeff = binomial(n as i64 - j as i64 - 1, n as i64 - c as i64);
        let inner = tail_inner_sum(pop, j, k, guard)?;
        let term = S::from_bigint(&coeff) * inner;
        terms.push(if (c - 1 - j) % 2 == 1 { -term } else { term });
    }
    Ok(terms)
}

/// A tail probability together with its cancellation condition estimate
/// `max |term| / |value|`.
#[derive(Clone, Debug)]
pub struct CcdfEvaluation<S: Scalar> {
    pub value: S,
    pub condition: f64,
}

impl<S: Scalar> CcdfEvaluation<S> {
    /// True when the float backend lost enough digits to distrust the value.
    pub fn cancellation_warning(&self) -> bool {
        S::BACKEND == Backend::Float && self.condition > CANCELLATION_WARN_CONDITION
    }
}

/// Sums pre-built tail terms and reports the condition estimate.
pub fn sum_tail_terms<S: Scalar>(terms: &[S]) -> CcdfEvaluation<S> {
    let mut acc = S::accumulator();
    let mut max_term = 0.0f64;
    for term in terms {
        max_term = max_term.max(term.to_f64().abs());
        acc.add(term.clone());
    }
    let value = acc.total();
    let magnitude = value.to_f64().abs();
    let condition = if magnitude == 0.0 {
        if max_term == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        max_term / magnitude
    };
    CcdfEvaluation { value, condition }
}

/// `Pr[T_c > k]` with its cancellation diagnostic.
pub fn ccdf_evaluated<S: Scalar>(
    pop: &Popularity<S>,
    c: usize,
    k: u64,
) -> Result<CcdfEvaluation<S>> {
    ccdf_evaluated_guarded(pop, c, k, DEFAULT_ENUMERATION_GUARD)
}

pub fn ccdf_evaluated_guarded<S: Scalar>(
    pop: &Popularity<S>,
    c: usize,
    k: u64,
    guard: u64,
) -> Result<CcdfEvaluation<S>> {
    let terms = ccdf_terms_guarded(pop, c, k, guard)?;
    Ok(sum_tail_terms(&terms))
}

/// `Pr[T_c > k]`; equals 1 exactly for every `k < c`.
pub fn ccdf<S: Scalar>(pop: &Popularity<S>, c: usize, k: u64) -> Result<S> {
    Ok(ccdf_evaluated(pop, c, k)?.value)
}

pub fn ccdf_guarded<S: Scalar>(pop: &Popularity<S>, c: usize, k: u64, guard: u64) -> Result<S> {
    Ok(ccdf_evaluated_guarded(pop, c, k, guard)?.value)
}

/// `Pr[T_c <= k] = 1 - Pr[T_c > k]`.
pub fn cdf<S: Scalar>(pop: &Popularity<S>, c: usize, k: u64) -> Result<S> {
    cdf_guarded(pop, c, k, DEFAULT_ENUMERATION_GUARD)
}

pub fn cdf_guarded<S: Scalar>(pop: &Popularity<S>, c: usize, k: u64, guard: u64) -> Result<S> {
    Ok(S::one() - ccdf_guarded(pop, c, k, guard)?)
}

/// `sum_{|J|=j} P_J^e (1 - P_J)`, the inner sums of the pdf. Splitting into
/// two plain power sums lets the small-sum reduction apply when `j > e + 1`;
/// otherwise a single enumeration accumulates the weighted terms directly.
fn pdf_inner_sum<S: Scalar>(pop: &Popularity<S>, j: usize, e: u32, guard: u64) -> Result<S> {
    let n = pop.n();
    if pop.is_uniform() {
        let ratio = S::from_int(j as i64) / S::from_int(n as i64);
        return Ok(S::from_bigint(&binomial(n as i64, j as i64))
            * ratio.power(e)
            * (S::one() - ratio));
    }
    if j > e as usize + 1 {
        let lower = power_sum_guarded(pop, j, e, guard)?;
        let upper = power_sum_guarded(pop, j, e + 1, guard)?;
        return Ok(lower - upper);
    }
    power_sum_with_complement_guarded(pop, j, e, guard)
}

/// `Pr[T_c = k]`, from the direct inclusion-exclusion formula
/// `sum_{j=0}^{c-1} (-1)^(c-1-j) C(n-j-1, n-c) sum_{|J|=j} P_J^(k-1)(1-P_J)`.
/// Zero for `k = 0` by definition, and exactly zero for every `0 < k < c`.
pub fn pdf<S: Scalar>(pop: &Popularity<S>, c: usize, k: u64) -> Result<S> {
    pdf_guarded(pop, c, k, DEFAULT_ENUMERATION_GUARD)
}

pub fn pdf_guarded<S: Scalar>(pop: &Popularity<S>, c: usize, k: u64, guard: u64) -> Result<S> {
    let n = pop.n();
    check_collection_size(c, n)?;
    if k == 0 {
        return Ok(S::zero());
    }
    let e = exponent(k)? - 1;
    let mut acc = S::accumulator();
    for j in 0..c {
        let coeff = binomial(n as i64 - j as i64 - 1, n as i64 - c as i64);
        let term = S::from_bigint(&coeff) * pdf_inner_sum(pop, j, e, guard)?;
        acc.add(if (c - 1 - j) % 2 == 1 { -term } else { term });
    }
    Ok(acc.total())
}

/// Exact pdf for the uniform popularity:
/// `Pr[T_c = k] = n! S(k-1, c-1) / ((n-c)! n^k)`.
pub fn pdf_uniform<S: Scalar>(n: usize, c: usize, k: u64) -> Result<S> {
    if n < 2 {
        return Err(Error::SizeTooSmall(n));
    }
    check_collection_size(c, n)?;
    if k == 0 {
        return Ok(S::zero());
    }
    let e = exponent(k)?;
    let numer = factorial(n) * stirling2_rolling(k - 1, c - 1);
    let denom = factorial(n - c) * BigInt::from(n).pow(e);
    Ok(S::from_big_ratio(&numer, &denom))
}

/// `Pr[T_c = c]`: the collection completes without a single wasted trial,
/// `c! * sum_{|J|=c} prod_{i in J} p_i`.
pub fn min_time_probability<S: Scalar>(pop: &Popularity<S>, c: usize) -> Result<S> {
    min_time_probability_guarded(pop, c, DEFAULT_ENUMERATION_GUARD)
}

pub fn min_time_probability_guarded<S: Scalar>(
    pop: &Popularity<S>,
    c: usize,
    guard: u64,
) -> Result<S> {
    let n = pop.n();
    check_collection_size(c, n)?;
    check_enumeration_guard(n, c, guard)?;
    let mut acc = S::accumulator();
    fold_subset_aggregates(
        pop.probs(),
        c,
        &S::one(),
        |a, b| a.clone() * b.clone(),
        |product| acc.add(product.clone()),
    );
    Ok(S::from_bigint(&factorial(c)) * acc.total())
}

/// `E[T_c]`, by summing the tail probabilities termwise: every subset J of
/// size below c contributes the geometric total `1/(1 - P_J)`.
pub fn expectation<S: Scalar>(pop: &Popularity<S>, c: usize) -> Result<S> {
    expectation_guarded(pop, c, DEFAULT_ENUMERATION_GUARD)
}

pub fn expectation_guarded<S: Scalar>(pop: &Popularity<S>, c: usize, guard: u64) -> Result<S> {
    let n = pop.n();
    check_collection_size(c, n)?;
    let mut acc = S::accumulator();
    for j in 0..c {
        let coeff = binomial(n as i64 - j as i64 - 1, n as i64 - c as i64);
        let geometric = if pop.is_uniform() {
            // sum over C(n, j) subsets of 1/(1 - j/n) = n/(n - j)
            S::from_bigint(&binomial(n as i64, j as i64)) * S::ratio(n as i64, n as i64 - j as i64)
        } else {
            check_enumeration_guard(n, j, guard)?;
            let mut inner = S::accumulator();
            fold_subset_aggregates(
                pop.probs(),
                j,
                &S::zero(),
                |a, b| a.clone() + b.clone(),
                |p| inner.add((S::one() - p.clone()).recip()),
            );
            inner.total()
        };
        let term = S::from_bigint(&coeff) * geometric;
        acc.add(if (c - 1 - j) % 2 == 1 { -term } else { term });
    }
    Ok(acc.total())
}

/// The alternating binomial sum
/// `sum_{i=0}^{c-1} (-1)^(c-1-i) C(n-i-1, n-c) C(n-k, i-u)`
/// for `0 <= u <= k < c <= n`. It collapses to 1 when `u = k` and to 0 when
/// `u < k`, which is exactly why the tail sum of the decomposition basis
/// reduces to the top weight.
pub fn collapse_coefficient(n: usize, c: usize, k: usize, u: usize) -> Result<BigInt> {
    if !(u <= k && k < c && c <= n) {
        return Err(Error::Range(format!(
            "need 0 <= u <= k < c <= n, got n = {n}, c = {c}, k = {k}, u = {u}"
        )));
    }
    let mut total = BigInt::zero();
    for i in 0..c {
        let product = binomial(n as i64 - i as i64 - 1, n as i64 - c as i64)
            * binomial(n as i64 - k as i64, i as i64 - u as i64);
        if (c - 1 - i) % 2 == 1 {
            total -= product;
        } else {
            total += product;
        }
    }
    Ok(total)
}

/// One row of a tabulated distribution.
#[derive(Clone, Debug)]
pub struct WaitingTimeRow<S: Scalar> {
    pub k: u64,
    pub pdf: S,
    pub cdf: S,
    pub ccdf: S,
}

/// pdf/CDF/CCDF over `k = 0..=k_max`, built from one enumeration per subset
/// size with the powers carried incrementally.
#[derive(Clone, Debug)]
pub struct WaitingTimeTable<S: Scalar> {
    c: usize,
    rows: Vec<WaitingTimeRow<S>>,
    condition: f64,
}

/// Default table extent: `max(3n, c + 20)` covers the distribution mode for
/// moderate skew.
pub fn default_k_max(n: usize, c: usize) -> u64 {
    (3 * n as u64).max(c as u64 + 20)
}

impl<S: Scalar> WaitingTimeTable<S> {
    pub fn build(pop: &Popularity<S>, c: usize, k_max: u64) -> Result<Self> {
        Self::build_guarded(pop, c, k_max, DEFAULT_ENUMERATION_GUARD)
    }

    pub fn build_guarded(pop: &Popularity<S>, c: usize, k_max: u64, guard: u64) -> Result<Self> {
        let n = pop.n();
        check_collection_size(c, n)?;
        let top = exponent(k_max)?;
        // inner[j][k] = sum_{|J|=j} P_J^k
        let mut inner: Vec<Vec<S>> = Vec::with_capacity(c);
        for j in 0..c {
            if pop.is_uniform() {
                let ratio = S::from_int(j as i64) / S::from_int(n as i64);
                let count = S::from_bigint(&binomial(n as i64, j as i64));
                let mut power = S::one();
                let mut row = Vec::with_capacity(top as usize + 1);
                for _ in 0..=top {
                    row.push(count.clone() * power.clone());
                    power = power * ratio.clone();
                }
                inner.push(row);
            } else {
                inner.push(power_sums_through_k_guarded(pop, j, top, guard)?);
            }
        }
        let mut rows = Vec::with_capacity(top as usize + 1);
        let mut previous_ccdf = S::one();
        let mut worst_condition = 1.0f64;
        for k in 0..=top {
            let mut terms = Vec::with_capacity(c);
            for (j, sums) in inner.iter().enumerate() {
                let coeff = binomial(n as i64 - j as i64 - 1, n as i64 - c as i64);
                let term = S::from_bigint(&coeff) * sums[k as usize].clone();
                terms.push(if (c - 1 - j) % 2 == 1 { -term } else { term });
            }
            let evaluated = sum_tail_terms(&terms);
            worst_condition = worst_condition.max(evaluated.condition);
            let ccdf = evaluated.value;
            let pdf = if k == 0 {
                S::zero()
            } else {
                previous_ccdf.clone() - ccdf.clone()
            };
            rows.push(WaitingTimeRow {
                k: u64::from(k),
                pdf,
                cdf: S::one() - ccdf.clone(),
                ccdf: ccdf.clone(),
            });
            previous_ccdf = ccdf;
        }
        Ok(Self {
            c,
            rows,
            condition: worst_condition,
        })
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn rows(&self) -> &[WaitingTimeRow<S>] {
        &self.rows
    }

    /// Worst cancellation condition estimate over all tabulated tails.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn cancellation_warning(&self) -> bool {
        S::BACKEND == Backend::Float && self.condition > CANCELLATION_WARN_CONDITION
    }
}
