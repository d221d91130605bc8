//! Decomposition of subset-probability power sums over the binomial basis
//! `C(n-k, j-u)`.
//!
//! For every exponent `0 < k < n` the size-j power sum can be written as
//! `sum_{|J|=j} P_J^k = sum_{u=1}^{k} C(n-k, j-u) * w_u` with weights that do
//! not depend on j and whose top entry `w_k` is always 1. The weights have
//! an analytic form for any popularity (an alternating combination of the
//! "small" sums over subset sizes 1..k) and an exact Stirling-number form
//! for the uniform popularity. Rearranging the same decomposition expresses
//! a size-j power sum directly through the k small sums, which is the fast
//! evaluation path: for j much larger than k it replaces `C(n, j)` subset
//! visits by `sum_{q<=k} C(n, q)`.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::numerics::{
    binomial, factorial, stirling2, Accumulator, Backend, Scalar, CANCELLATION_WARN_CONDITION,
};
use crate::popularity::{Popularity, DEFAULT_ENUMERATION_GUARD};
use crate::power_sums::{power_sum_bruteforce_guarded, power_sums_through_k_guarded};

/// How a weight table was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Analytic form over the small sums of an arbitrary popularity.
    General,
    /// Exact Stirling-number form for the uniform popularity.
    Uniform,
}

/// The sums `sum_{|J|=q} P_J^k` for `q = 1..=k`, computed once and shared
/// between weight-table construction and the fast evaluation path.
#[derive(Clone, Debug)]
pub struct SmallPowerSums<S: Scalar> {
    n: usize,
    k: u32,
    sums: Vec<S>,
}

impl<S: Scalar> SmallPowerSums<S> {
    pub fn compute(pop: &Popularity<S>, k: u32) -> Result<Self> {
        Self::compute_guarded(pop, k, DEFAULT_ENUMERATION_GUARD)
    }

    pub fn compute_guarded(pop: &Popularity<S>, k: u32, guard: u64) -> Result<Self> {
        let n = pop.n();
        check_exponent(k, n)?;
        let sums = (1..=k as usize)
            .map(|q| power_sum_bruteforce_guarded(pop, q, k, guard))
            .collect::<Result<Vec<S>>>()?;
        Ok(Self { n, k, sums })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// `sum_{|J|=q} P_J^k` for `1 <= q <= k`.
    pub fn get(&self, q: u32) -> &S {
        assert!(q >= 1 && q <= self.k, "q = {q} outside 1..={}", self.k);
        &self.sums[q as usize - 1]
    }
}

fn check_exponent(k: u32, n: usize) -> Result<()> {
    if k < 1 || k as usize >= n {
        return Err(Error::Range(format!(
            "the decomposition needs 1 <= k < n, got k = {k}, n = {n}"
        )));
    }
    Ok(())
}

/// The j-independent weights of the power-sum decomposition for one
/// exponent `k`, together with a cancellation diagnostic for float mode.
#[derive(Clone, Debug)]
pub struct DecompositionWeights<S: Scalar> {
    n: usize,
    k: u32,
    weights: Vec<S>,
    provenance: Provenance,
    condition: f64,
}

impl<S: Scalar> DecompositionWeights<S> {
    /// Analytic weights for an arbitrary popularity:
    /// `w_v = sum_{q=1}^{v} (-1)^(v-q) C(n-k-1+v-q, v-q) * small_q`.
    pub fn from_popularity(pop: &Popularity<S>, k: u32) -> Result<Self> {
        Self::from_popularity_guarded(pop, k, DEFAULT_ENUMERATION_GUARD)
    }

    pub fn from_popularity_guarded(pop: &Popularity<S>, k: u32, guard: u64) -> Result<Self> {
        let small = SmallPowerSums::compute_guarded(pop, k, guard)?;
        Ok(Self::from_small_sums(&small))
    }

    /// Builds the weights from precomputed small sums.
    pub fn from_small_sums(small: &SmallPowerSums<S>) -> Self {
        let n = small.n();
        let k = small.k();
        let mut weights = Vec::with_capacity(k as usize);
        let mut worst_condition = 1.0f64;
        for v in 1..=k {
            let mut acc = S::accumulator();
            let mut max_term = 0.0f64;
            for q in 1..=v {
                let d = (v - q) as i64;
                let coeff = binomial(n as i64 - k as i64 - 1 + d, d);
                let mut term = S::from_bigint(&coeff) * small.get(q).clone();
                if d % 2 == 1 {
                    term = -term;
                }
                max_term = max_term.max(term.to_f64().abs());
                acc.add(term);
            }
            let weight = acc.total();
            let magnitude = weight.to_f64().abs();
            let condition = if magnitude == 0.0 {
                if max_term == 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            } else {
                max_term / magnitude
            };
            worst_condition = worst_condition.max(condition);
            weights.push(weight);
        }
        Self {
            n,
            k,
            weights,
            provenance: Provenance::General,
            condition: worst_condition,
        }
    }

    /// Exact closed form for the uniform popularity on n items:
    /// `w_u = n^(-k) sum_i S(k, i) * i! * C(k-i, u-i) * C(n, i)`.
    pub fn uniform(n: usize, k: u32) -> Result<Self> {
        check_exponent(k, n)?;
        let n_pow_k = BigInt::from(n).pow(k);
        let mut weights = Vec::with_capacity(k as usize);
        for u in 1..=k as usize {
            let mut numer = BigInt::zero();
            for i in 1..=u {
                numer += stirling2(k as usize, i)
                    * factorial(i)
                    * binomial(k as i64 - i as i64, u as i64 - i as i64)
                    * binomial(n as i64, i as i64);
            }
            weights.push(S::from_big_ratio(&numer, &n_pow_k));
        }
        Ok(Self {
            n,
            k,
            weights,
            provenance: Provenance::Uniform,
            condition: 1.0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Worst `max |term| / |weight|` seen while assembling the table; the
    /// alternating construction can cancel catastrophically in float mode.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn cancellation_warning(&self) -> bool {
        S::BACKEND == Backend::Float && self.condition > CANCELLATION_WARN_CONDITION
    }

    /// The weight for basis index `u`, `1 <= u <= k`.
    pub fn weight(&self, u: u32) -> &S {
        assert!(u >= 1 && u <= self.k, "u = {u} outside 1..={}", self.k);
        &self.weights[u as usize - 1]
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    /// Evaluates the decomposition at subset size `j`:
    /// `sum_{u=1}^{k} C(n-k, j-u) * w_u`.
    pub fn evaluate(&self, j: usize) -> Result<S> {
        if j > self.n {
            return Err(Error::Range(format!(
                "subset size {j} exceeds n = {}",
                self.n
            )));
        }
        let mut acc = S::accumulator();
        for u in 1..=self.k {
            let coeff = binomial(self.n as i64 - self.k as i64, j as i64 - u as i64);
            if coeff.is_zero() {
                continue;
            }
            acc.add(S::from_bigint(&coeff) * self.weight(u).clone());
        }
        Ok(acc.total())
    }
}

/// Coefficient expressing a size-j power sum through the size-q small sums:
/// `sum_{|J|=j} P_J^k = sum_{q=1}^{k} r_{k,j}(q) * sum_{|J|=q} P_J^k`.
///
/// For `q < j` this is the factored closed form
/// `(-1)^(k-q) C(n-k, j-k) C(n-q, n-k) (j-k)/(j-q)`, which carries a single
/// sign per term; `r_{k,j}(j) = 1`, and `r_{k,j}(q) = 0` for `j < q <= k`.
pub fn reduction_coefficient<S: Scalar>(n: usize, k: u32, j: usize, q: u32) -> Result<S> {
    check_exponent(k, n)?;
    if q < 1 || q > k {
        return Err(Error::Range(format!(
            "reduction index q = {q} outside 1..={k}"
        )));
    }
    if j > n {
        return Err(Error::Range(format!("subset size {j} exceeds n = {n}")));
    }
    let qz = q as usize;
    if qz == j {
        return Ok(S::one());
    }
    if j < qz {
        return Ok(S::zero());
    }
    let lead = binomial(n as i64 - k as i64, j as i64 - k as i64);
    if lead.is_zero() {
        return Ok(S::zero());
    }
    let num = lead
        * binomial(n as i64 - q as i64, n as i64 - k as i64)
        * BigInt::from(j as i64 - k as i64);
    let den = BigInt::from(j as i64 - q as i64);
    let value = S::from_big_ratio(&num, &den);
    Ok(if (k - q) % 2 == 1 { -value } else { value })
}

/// `sum_{|J|=j} P_J^k` evaluated from the k small sums alone. Valid for
/// `k < j`; at `j = k` the decomposition degenerates to a tautology and the
/// caller must fall back to brute force.
pub fn power_sum_fast<S: Scalar>(pop: &Popularity<S>, j: usize, k: u32) -> Result<S> {
    power_sum_fast_guarded(pop, j, k, DEFAULT_ENUMERATION_GUARD)
}

pub fn power_sum_fast_guarded<S: Scalar>(
    pop: &Popularity<S>,
    j: usize,
    k: u32,
    guard: u64,
) -> Result<S> {
    check_fast_domain(j, k, pop.n())?;
    let small = SmallPowerSums::compute_guarded(pop, k, guard)?;
    power_sum_fast_with(&small, j)
}

/// Fast path reusing precomputed small sums.
pub fn power_sum_fast_with<S: Scalar>(small: &SmallPowerSums<S>, j: usize) -> Result<S> {
    check_fast_domain(j, small.k(), small.n())?;
    let mut acc = S::accumulator();
    for q in 1..=small.k() {
        let coeff: S = reduction_coefficient(small.n(), small.k(), j, q)?;
        acc.add(coeff * small.get(q).clone());
    }
    Ok(acc.total())
}

fn check_fast_domain(j: usize, k: u32, n: usize) -> Result<()> {
    check_exponent(k, n)?;
    if j <= k as usize || j > n {
        return Err(Error::Range(format!(
            "the fast path needs k < j <= n, got j = {j}, k = {k}, n = {n}"
        )));
    }
    Ok(())
}

/// Convenience entry point: brute force for `j <= k`, fast path for
/// `j > k`. Exponent zero collapses to the subset count `C(n, j)`.
pub fn power_sum<S: Scalar>(pop: &Popularity<S>, j: usize, k: u32) -> Result<S> {
    power_sum_guarded(pop, j, k, DEFAULT_ENUMERATION_GUARD)
}

pub fn power_sum_guarded<S: Scalar>(
    pop: &Popularity<S>,
    j: usize,
    k: u32,
    guard: u64,
) -> Result<S> {
    if j > pop.n() {
        return Err(Error::Range(format!(
            "subset size {j} exceeds n = {}",
            pop.n()
        )));
    }
    if k == 0 {
        return Ok(S::from_bigint(&binomial(pop.n() as i64, j as i64)));
    }
    if j > k as usize {
        power_sum_fast_guarded(pop, j, k, guard)
    } else {
        power_sum_bruteforce_guarded(pop, j, k, guard)
    }
}

/// The full alternating sum `sum_{0 <= |J| <= n} (-1)^|J| P_J^k` by brute
/// force. It vanishes exactly whenever `k < n`; larger exponents are
/// rejected because the identity no longer holds there.
pub fn alternating_power_sum<S: Scalar>(pop: &Popularity<S>, k: u32) -> Result<S> {
    alternating_power_sum_guarded(pop, k, DEFAULT_ENUMERATION_GUARD)
}

pub fn alternating_power_sum_guarded<S: Scalar>(
    pop: &Popularity<S>,
    k: u32,
    guard: u64,
) -> Result<S> {
    let n = pop.n();
    if k as usize >= n {
        return Err(Error::Range(format!(
            "the alternating sum vanishes only for k < n, got k = {k}, n = {n}"
        )));
    }
    let mut acc = S::accumulator();
    for j in 0..=n {
        // one enumeration per subset size; signs alternate with |J|
        let sums = power_sums_through_k_guarded(pop, j, k, guard)?;
        let value = sums.into_iter().last().expect("k+1 sums");
        acc.add(if j % 2 == 1 { -value } else { value });
    }
    Ok(acc.total())
}
