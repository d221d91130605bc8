//! Validated popularity distributions and subset machinery: subset
//! probabilities and lexicographic enumeration of fixed-size subsets.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{binomial, Accumulator, Backend, Scalar};

/// Default cap on how many subsets a single exhaustive enumeration may
/// visit. `C(n, n/2)` passes 2^28 around n = 32; larger requests are almost
/// always a mistake and must opt in explicitly.
pub const DEFAULT_ENUMERATION_GUARD: u64 = 1 << 28;

/// |sum - 1| tolerance accepted by float-backed popularities.
pub const FLOAT_SUM_TOLERANCE: f64 = 1e-12;

/// A validated probability vector over `n >= 2` items.
///
/// Items are addressed 1-based throughout the public API, matching the
/// index sets drawn from the reference set `{1..n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Popularity<S: Scalar> {
    probs: Vec<S>,
    uniform: bool,
}

impl<S: Scalar> Popularity<S> {
    /// Validates that every probability lies strictly inside (0, 1) and the
    /// sum is 1 (exactly on the exact backend, within
    /// [`FLOAT_SUM_TOLERANCE`] on float).
    pub fn from_values(values: Vec<S>) -> Result<Self> {
        Self::build(values, false)
    }

    /// Like [`Popularity::from_values`] but rescales by the total when the
    /// sum check fails.
    pub fn from_values_renormalized(values: Vec<S>) -> Result<Self> {
        Self::build(values, true)
    }

    fn build(mut values: Vec<S>, renormalize: bool) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::SizeTooSmall(values.len()));
        }
        let mut acc = S::accumulator();
        for v in &values {
            acc.add(v.clone());
        }
        let sum = acc.total();
        if !sum_is_one(&sum) {
            if !renormalize {
                return Err(Error::NotNormalized {
                    sum: sum.to_string(),
                });
            }
            if sum <= S::zero() {
                return Err(Error::NotNormalized {
                    sum: sum.to_string(),
                });
            }
            values = values.into_iter().map(|v| v / sum.clone()).collect();
        }
        for (i, v) in values.iter().enumerate() {
            if *v <= S::zero() || *v >= S::one() {
                return Err(Error::OutOfRange {
                    index: i + 1,
                    value: v.to_string(),
                });
            }
        }
        let uniform = values.iter().all(|v| *v == values[0]);
        Ok(Self {
            probs: values,
            uniform,
        })
    }

    /// The uniform popularity `p_i = 1/n`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::SizeTooSmall(n));
        }
        let p = S::one() / S::from_int(n as i64);
        Ok(Self {
            probs: vec![p; n],
            uniform: true,
        })
    }

    pub fn n(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    /// 1-based item probability.
    pub fn prob(&self, l: usize) -> Result<&S> {
        if l < 1 || l > self.n() {
            return Err(Error::IndexOutOfRange {
                index: l,
                n: self.n(),
            });
        }
        Ok(&self.probs[l - 1])
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// `sum_l p_l^k`.
    pub fn sum_of_powers(&self, k: u32) -> S {
        let mut acc = S::accumulator();
        for p in &self.probs {
            acc.add(p.power(k));
        }
        acc.total()
    }

    /// `P_J = sum_{i in J} p_i`; the empty set gives 0, the full set 1.
    pub fn subset_probability(&self, set: &IndexSet) -> Result<S> {
        let mut acc = S::accumulator();
        for &l in set.members() {
            if l > self.n() {
                return Err(Error::IndexOutOfRange {
                    index: l,
                    n: self.n(),
                });
            }
            acc.add(self.probs[l - 1].clone());
        }
        Ok(acc.total())
    }

    /// The same distribution on the float backend.
    pub fn to_float(&self) -> Popularity<f64> {
        Popularity {
            probs: self.probs.iter().map(Scalar::to_f64).collect(),
            uniform: self.uniform,
        }
    }
}

impl Popularity<BigRational> {
    /// A random exact popularity built from integer weights in `1..=1000`;
    /// the sum is exactly 1 by construction.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n < 2 {
            return Err(Error::SizeTooSmall(n));
        }
        let weights: Vec<u32> = (0..n).map(|_| rng.random_range(1..=1000)).collect();
        let total: u32 = weights.iter().sum();
        let values = weights
            .into_iter()
            .map(|w| BigRational::new(BigInt::from(w), BigInt::from(total)))
            .collect();
        Self::from_values(values)
    }
}

fn sum_is_one<S: Scalar>(sum: &S) -> bool {
    match S::BACKEND {
        Backend::Exact => *sum == S::one(),
        Backend::Float => (sum.to_f64() - 1.0).abs() <= FLOAT_SUM_TOLERANCE,
    }
}

/// A subset of the reference set `{1..n}`: strictly increasing 1-based
/// indices; sizes 0..=n are all valid.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexSet {
    members: Vec<usize>,
}

impl IndexSet {
    pub fn new(members: Vec<usize>) -> Result<Self> {
        if members.first().is_some_and(|&m| m == 0) {
            return Err(Error::InvalidIndexSet("indices are 1-based".to_owned()));
        }
        for w in members.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidIndexSet(format!(
                    "members must be strictly increasing, found {} before {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { members })
    }

    pub fn empty() -> Self {
        Self {
            members: Vec::new(),
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Lexicographic stream of every size-`j` subset of `{1..n}`.
///
/// The stream is lazy: `C(n, n/2)` outgrows memory near n = 30, so subsets
/// are produced one at a time and consumers aggregate as they go.
pub fn subsets_of_size(n: usize, j: usize) -> Result<Subsets> {
    if j > n {
        return Err(Error::Range(format!("subset size {j} exceeds n = {n}")));
    }
    Ok(Subsets {
        n,
        j,
        indices: (1..=j).collect(),
        done: false,
    })
}

pub struct Subsets {
    n: usize,
    j: usize,
    indices: Vec<usize>,
    done: bool,
}

impl Iterator for Subsets {
    type Item = IndexSet;

    fn next(&mut self) -> Option<IndexSet> {
        if self.done {
            return None;
        }
        let out = IndexSet {
            members: self.indices.clone(),
        };
        self.advance();
        Some(out)
    }
}

impl Subsets {
    fn advance(&mut self) {
        let j = self.j;
        let mut t = j;
        while t > 0 {
            t -= 1;
            // position t may hold values up to n - (j - 1 - t)
            if self.indices[t] < self.n - (j - 1 - t) {
                self.indices[t] += 1;
                for s in t + 1..j {
                    self.indices[s] = self.indices[s - 1] + 1;
                }
                return;
            }
        }
        self.done = true;
    }
}

/// Errors when `C(m, j)` exceeds the enumeration guard.
pub(crate) fn check_enumeration_guard(m: usize, j: usize, guard: u64) -> Result<()> {
    let count = binomial(m as i64, j as i64);
    if count > BigInt::from(guard) {
        return Err(Error::EnumerationTooLarge { count, guard });
    }
    Ok(())
}

/// Visits the aggregate of every size-`j` subset of `values` in
/// lexicographic order. `base` seeds the aggregation (zero for sums, one
/// for products); aggregates are rebuilt incrementally from the deepest
/// changed position, so a visit costs O(1) amortized.
pub(crate) fn fold_subset_aggregates<S: Scalar>(
    values: &[S],
    j: usize,
    base: &S,
    combine: impl Fn(&S, &S) -> S,
    mut visit: impl FnMut(&S),
) {
    let m = values.len();
    debug_assert!(j <= m);
    if j == 0 {
        visit(base);
        return;
    }
    let mut idx: Vec<usize> = (0..j).collect();
    let mut agg: Vec<S> = Vec::with_capacity(j);
    for t in 0..j {
        let prev = if t == 0 { base } else { &agg[t - 1] };
        agg.push(combine(prev, &values[idx[t]]));
    }
    loop {
        visit(&agg[j - 1]);
        let mut t = j;
        loop {
            if t == 0 {
                return;
            }
            t -= 1;
            // position t may hold values up to m - j + t (0-based)
            if idx[t] < m - j + t {
                break;
            }
        }
        idx[t] += 1;
        {
            let prev = if t == 0 { base } else { &agg[t - 1] };
            agg[t] = combine(prev, &values[idx[t]]);
        }
        for s in t + 1..j {
            idx[s] = idx[s - 1] + 1;
            agg[s] = combine(&agg[s - 1], &values[idx[s]]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn rat(num: i64, den: i64) -> BigRational {
        BigRational::ratio(num, den)
    }

    fn tenths() -> Popularity<BigRational> {
        Popularity::from_values(vec![rat(1, 10), rat(2, 10), rat(3, 10), rat(4, 10)]).unwrap()
    }

    #[test]
    fn from_values_validation() {
        assert_eq!(tenths().n(), 4);
        assert!(tenths()
            .subset_probability(&IndexSet::new(vec![1, 2, 3, 4]).unwrap())
            .unwrap()
            .eq(&rat(1, 1)));

        let err = Popularity::from_values(vec![0.5f64, 0.5, 0.1]).unwrap_err();
        assert!(matches!(err, Error::NotNormalized { .. }));

        let err = Popularity::from_values(vec![1.0f64, 0.0]).unwrap_err();
        assert!(matches!(err, Error::OutOfRange { .. }));

        let err = Popularity::<f64>::from_values(vec![0.5]).unwrap_err();
        assert_eq!(err, Error::SizeTooSmall(1));
    }

    #[test]
    fn renormalization_rescales() {
        let pop = Popularity::from_values_renormalized(vec![0.5f64, 0.5, 0.1]).unwrap();
        assert!((pop.probs()[2] - 0.1 / 1.1).abs() < 1e-15);
        let pop =
            Popularity::from_values_renormalized(vec![rat(1, 2), rat(1, 2), rat(1, 10)]).unwrap();
        assert_eq!(pop.probs()[2], rat(1, 11));
    }

    #[test]
    fn uniform_popularity() {
        let pop = Popularity::<BigRational>::uniform(3).unwrap();
        assert_eq!(pop.probs(), &[rat(1, 3), rat(1, 3), rat(1, 3)]);
        assert!(pop.is_uniform());
        let pop = Popularity::<BigRational>::uniform(2).unwrap();
        assert_eq!(pop.probs(), &[rat(1, 2), rat(1, 2)]);
        assert_eq!(
            Popularity::<BigRational>::uniform(1).unwrap_err(),
            Error::SizeTooSmall(1)
        );
        assert!(Popularity::<f64>::uniform(7).is_ok());
    }

    #[test]
    fn subset_probability_examples() {
        let pop = tenths();
        let j = IndexSet::new(vec![1, 3]).unwrap();
        assert_eq!(pop.subset_probability(&j).unwrap(), rat(4, 10));
        assert_eq!(
            pop.subset_probability(&IndexSet::empty()).unwrap(),
            rat(0, 1)
        );
        let full = IndexSet::new(vec![1, 2, 3, 4]).unwrap();
        assert_eq!(pop.subset_probability(&full).unwrap(), rat(1, 1));
        let bad = IndexSet::new(vec![5]).unwrap();
        assert!(matches!(
            pop.subset_probability(&bad).unwrap_err(),
            Error::IndexOutOfRange { index: 5, n: 4 }
        ));
    }

    #[test]
    fn index_set_validation() {
        assert!(IndexSet::new(vec![1, 2, 2]).is_err());
        assert!(IndexSet::new(vec![2, 1]).is_err());
        assert!(IndexSet::new(vec![0, 1]).is_err());
        assert!(IndexSet::new(vec![]).unwrap().is_empty());
    }

    #[test]
    fn subsets_are_lexicographic_and_complete() {
        let all: Vec<IndexSet> = subsets_of_size(3, 2).unwrap().collect();
        assert_eq!(
            all,
            vec![
                IndexSet::new(vec![1, 2]).unwrap(),
                IndexSet::new(vec![1, 3]).unwrap(),
                IndexSet::new(vec![2, 3]).unwrap(),
            ]
        );

        let empties: Vec<IndexSet> = subsets_of_size(4, 0).unwrap().collect();
        assert_eq!(empties, vec![IndexSet::empty()]);

        assert!(subsets_of_size(3, 4).is_err());

        // count, distinctness and ordering over the full small grid
        for n in 0..=12usize {
            for j in 0..=n {
                let mut seen = BTreeSet::new();
                let mut previous: Option<IndexSet> = None;
                let mut count = 0u64;
                for set in subsets_of_size(n, j).unwrap() {
                    assert_eq!(set.len(), j);
                    if let Some(prev) = &previous {
                        assert!(prev < &set, "not lexicographic at n={n}, j={j}");
                    }
                    previous = Some(set.clone());
                    assert!(seen.insert(set));
                    count += 1;
                }
                assert_eq!(
                    count,
                    binomial(n as i64, j as i64).to_u64().unwrap(),
                    "count mismatch at n={n}, j={j}"
                );
            }
        }
    }

    #[test]
    fn guard_triggers() {
        let err = check_enumeration_guard(40, 20, 1 << 28).unwrap_err();
        assert!(matches!(err, Error::EnumerationTooLarge { .. }));
        assert!(check_enumeration_guard(20, 10, 1 << 28).is_ok());
    }

    proptest! {
        #[test]
        fn random_popularities_are_valid(weights in prop::collection::vec(1u32..=1000, 2..=8)) {
            let total: u32 = weights.iter().sum();
            let values: Vec<BigRational> = weights
                .iter()
                .map(|&w| BigRational::new(BigInt::from(w), BigInt::from(total)))
                .collect();
            let pop = Popularity::from_values(values).unwrap();
            prop_assert_eq!(pop.n(), weights.len());
        }

        #[test]
        fn subset_probability_is_additive_over_disjoint_unions(
            weights in prop::collection::vec(1u32..=1000, 2..=8),
            mask_a in 0u32..256,
            mask_b in 0u32..256,
        ) {
            let total: u32 = weights.iter().sum();
            let values: Vec<BigRational> = weights
                .iter()
                .map(|&w| BigRational::new(BigInt::from(w), BigInt::from(total)))
                .collect();
            let pop = Popularity::from_values(values).unwrap();
            let n = pop.n();
            let bit = |mask: u32, i: usize| mask & (1 << (i - 1)) != 0;
            // force disjointness by removing mask_a's items from mask_b
            let a: Vec<usize> = (1..=n).filter(|&i| bit(mask_a, i)).collect();
            let b: Vec<usize> = (1..=n).filter(|&i| bit(mask_b, i) && !bit(mask_a, i)).collect();
            let union: Vec<usize> = (1..=n).filter(|&i| bit(mask_a | mask_b, i)).collect();
            let a = IndexSet::new(a).unwrap();
            let b = IndexSet::new(b).unwrap();
            let union = IndexSet::new(union).unwrap();
            prop_assert_eq!(
                pop.subset_probability(&a).unwrap() + pop.subset_probability(&b).unwrap(),
                pop.subset_probability(&union).unwrap()
            );
        }

        #[test]
        fn complement_law_is_exact(weights in prop::collection::vec(1u32..=1000, 2..=8), mask in 0u32..256) {
            let total: u32 = weights.iter().sum();
            let values: Vec<BigRational> = weights
                .iter()
                .map(|&w| BigRational::new(BigInt::from(w), BigInt::from(total)))
                .collect();
            let pop = Popularity::from_values(values).unwrap();
            let n = pop.n();
            let inside: Vec<usize> = (1..=n).filter(|i| mask & (1 << (i - 1)) != 0).collect();
            let outside: Vec<usize> = (1..=n).filter(|i| mask & (1 << (i - 1)) == 0).collect();
            let inside = IndexSet::new(inside).unwrap();
            let outside = IndexSet::new(outside).unwrap();
            prop_assert_eq!(
                pop.subset_probability(&inside).unwrap()
                    + pop.subset_probability(&outside).unwrap(),
                rat(1, 1)
            );
        }
    }
}
