//! Sums of powers of subset probabilities: the brute-force oracle that
//! walks every subset of a given size, its element-conditioned variants,
//! and the closed forms known for exponents one to three.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::numerics::{binomial, Accumulator, Scalar};
use crate::popularity::{
    check_enumeration_guard, fold_subset_aggregates, Popularity, DEFAULT_ENUMERATION_GUARD,
};

/// Whether a conditioned sum ranges over subsets containing or omitting the
/// distinguished element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Conditioning {
    Include,
    Exclude,
}

fn check_subset_size(j: usize, n: usize) -> Result<()> {
    if j > n {
        return Err(Error::Range(format!("subset size {j} exceeds n = {n}")));
    }
    Ok(())
}

/// `sum_{|J|=j} P_J^k` by full enumeration, with the convention
/// `P_empty^0 = 1` (so `j = 0, k = 0` gives 1 and `j = 0, k > 0` gives 0).
pub fn power_sum_bruteforce<S: Scalar>(pop: &Popularity<S>, j: usize, k: u32) -> Result<S> {
    power_sum_bruteforce_guarded(pop, j, k, DEFAULT_ENUMERATION_GUARD)
}

pub fn power_sum_bruteforce_guarded<S: Scalar>(
    pop: &Popularity<S>,
    j: usize,
    k: u32,
    guard: u64,
) -> Result<S> {
    check_subset_size(j, pop.n())?;
    check_enumeration_guard(pop.n(), j, guard)?;
    let mut acc = S::accumulator();
    fold_subset_aggregates(
        pop.probs(),
        j,
        &S::zero(),
        |a, b| a.clone() + b.clone(),
        |p| acc.add(p.power(k)),
    );
    Ok(acc.total())
}

/// `sum_{|J|=j} P_J^k (1 - P_J)` by full enumeration; these are the inner
/// sums of the waiting-time pdf.
pub fn power_sum_with_complement<S: Scalar>(pop: &Popularity<S>, j: usize, k: u32) -> Result<S> {
    power_sum_with_complement_guarded(pop, j, k, DEFAULT_ENUMERATION_GUARD)
}

pub fn power_sum_with_complement_guarded<S: Scalar>(
    pop: &Popularity<S>,
    j: usize,
    k: u32,
    guard: u64,
) -> Result<S> {
    check_subset_size(j, pop.n())?;
    check_enumeration_guard(pop.n(), j, guard)?;
    let mut acc = S::accumulator();
    fold_subset_aggregates(
        pop.probs(),
        j,
        &S::zero(),
        |a, b| a.clone() + b.clone(),
        |p| acc.add(p.power(k) * (S::one() - p.clone())),
    );
    Ok(acc.total())
}

/// Every `sum_{|J|=j} P_J^k` for `k = 0..=k_max` from a single enumeration;
/// the power is carried incrementally along each subset.
pub fn power_sums_through_k<S: Scalar>(
    pop: &Popularity<S>,
    j: usize,
    k_max: u32,
) -> Result<Vec<S>> {
    power_sums_through_k_guarded(pop, j, k_max, DEFAULT_ENUMERATION_GUARD)
}

pub fn power_sums_through_k_guarded<S: Scalar>(
    pop: &Popularity<S>,
    j: usize,
    k_max: u32,
    guard: u64,
) -> Result<Vec<S>> {
    check_subset_size(j, pop.n())?;
    check_enumeration_guard(pop.n(), j, guard)?;
    let mut accs: Vec<S::Accumulator> = (0..=k_max).map(|_| S::accumulator()).collect();
    fold_subset_aggregates(
        pop.probs(),
        j,
        &S::zero(),
        |a, b| a.clone() + b.clone(),
        |p| {
            let mut power = S::one();
            for acc in accs.iter_mut() {
                acc.add(power.clone());
                power = power * p.clone();
            }
        },
    );
    Ok(accs.iter().map(Accumulator::total).collect())
}

/// Conditioned power sum over size-`j` subsets that contain (`Include`) or
/// omit (`Exclude`) the 1-based element `l`.
pub fn power_sum_conditioned<S: Scalar>(
    pop: &Popularity<S>,
    l: usize,
    j: usize,
    k: u32,
    mode: Conditioning,
) -> Result<S> {
    power_sum_conditioned_guarded(pop, l, j, k, mode, DEFAULT_ENUMERATION_GUARD)
}

pub fn power_sum_conditioned_guarded<S: Scalar>(
    pop: &Popularity<S>,
    l: usize,
    j: usize,
    k: u32,
    mode: Conditioning,
    guard: u64,
) -> Result<S> {
    let n = pop.n();
    check_subset_size(j, n)?;
    let pivot = pop.prob(l)?.clone();
    let rest: Vec<S> = pop
        .probs()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != l - 1)
        .map(|(_, p)| p.clone())
        .collect();
    let mut acc = S::accumulator();
    match mode {
        Conditioning::Exclude => {
            if j > rest.len() {
                // only the full set has size n, and it contains l
                return Ok(S::zero());
            }
            check_enumeration_guard(rest.len(), j, guard)?;
            fold_subset_aggregates(
                &rest,
                j,
                &S::zero(),
                |a, b| a.clone() + b.clone(),
                |p| acc.add(p.power(k)),
            );
        }
        Conditioning::Include => {
            if j == 0 {
                return Ok(S::zero());
            }
            check_enumeration_guard(rest.len(), j - 1, guard)?;
            fold_subset_aggregates(
                &rest,
                j - 1,
                &pivot,
                |a, b| a.clone() + b.clone(),
                |p| acc.add(p.power(k)),
            );
        }
    }
    Ok(acc.total())
}

/// Closed form of `sum_{|J|=j} P_J`, identical for every popularity:
/// `C(n-1, j-1)`.
pub fn closed_power_sum_k1(n: usize, j: usize) -> Result<BigInt> {
    check_subset_size(j, n)?;
    Ok(binomial(n as i64 - 1, j as i64 - 1))
}

/// Closed form of `sum_{|J|=j, l not in J} P_J = (1 - p_l) C(n-2, j-1)`,
/// valid for `1 <= j <= n-1`.
pub fn closed_power_sum_k1_excluding<S: Scalar>(
    pop: &Popularity<S>,
    l: usize,
    j: usize,
) -> Result<S> {
    let n = pop.n();
    let p = pop.prob(l)?.clone();
    if j < 1 || j > n - 1 {
        return Err(Error::Range(format!(
            "the excluding closed form needs 1 <= j <= n-1, got j = {j}, n = {n}"
        )));
    }
    Ok((S::one() - p) * S::from_bigint(&binomial(n as i64 - 2, j as i64 - 1)))
}

/// Closed form of `sum_{|J|=j} P_J^2 = C(n-2, j-2) + C(n-2, j-1) sum p_l^2`.
pub fn closed_power_sum_k2<S: Scalar>(pop: &Popularity<S>, j: usize) -> Result<S> {
    let n = pop.n() as i64;
    check_subset_size(j, pop.n())?;
    let j = j as i64;
    Ok(S::from_bigint(&binomial(n - 2, j - 2))
        + S::from_bigint(&binomial(n - 2, j - 1)) * pop.sum_of_powers(2))
}

/// Closed form of `sum_{|J|=j, l in J} P_J^2`; its binomials have n-3 on
/// top, so it needs `n >= 3`.
pub fn closed_power_sum_k2_including<S: Scalar>(
    pop: &Popularity<S>,
    l: usize,
    j: usize,
) -> Result<S> {
    let n = pop.n();
    if n < 3 {
        return Err(Error::Range(format!(
            "the including closed form needs n >= 3, got n = {n}"
        )));
    }
    let p = pop.prob(l)?.clone();
    if j < 1 || j > n {
        return Err(Error::Range(format!(
            "the including closed form needs 1 <= j <= n, got j = {j}, n = {n}"
        )));
    }
    let n = n as i64;
    let j = j as i64;
    let c1 = S::from_bigint(&(binomial(n - 3, j - 1) - binomial(n - 3, j - 2)));
    let c2 = S::from_bigint(&binomial(n - 3, j - 2));
    let c3 = S::from_bigint(&binomial(n - 3, j - 3));
    Ok(p.clone() * p.clone() * c1
        + S::from_int(2) * p * c2.clone()
        + c3
        + c2 * pop.sum_of_powers(2))
}

/// Closed form of `sum_{|J|=j} P_J^3`; needs `n >= 3` like the including
/// form it derives from.
pub fn closed_power_sum_k3<S: Scalar>(pop: &Popularity<S>, j: usize) -> Result<S> {
    let n = pop.n();
    if n < 3 {
        return Err(Error::Range(format!(
            "the cube closed form needs n >= 3, got n = {n}"
        )));
    }
    check_subset_size(j, n)?;
    let n = n as i64;
    let j = j as i64;
    let c1 = S::from_bigint(&(binomial(n - 3, j - 1) - binomial(n - 3, j - 2)));
    let c2 = S::from_bigint(&binomial(n - 3, j - 2));
    let c3 = S::from_bigint(&binomial(n - 3, j - 3));
    Ok(pop.sum_of_powers(3) * c1 + S::from_int(3) * pop.sum_of_powers(2) * c2 + c3)
}
