//! The identity verification suites behind `ccp verify`: every closed form,
//! decomposition identity and tail statement is replayed against the
//! brute-force subset oracle on a seeded random grid of exact popularities.

use ccp_core::decomposition::{
    alternating_power_sum, power_sum_fast, reduction_coefficient, DecompositionWeights,
    SmallPowerSums,
};
use ccp_core::numerics::binomial;
use ccp_core::popularity::Popularity;
use ccp_core::power_sums::{
    closed_power_sum_k1, closed_power_sum_k1_excluding, closed_power_sum_k2,
    closed_power_sum_k2_including, closed_power_sum_k3, power_sum_bruteforce,
    power_sum_conditioned, power_sum_with_complement, Conditioning,
};
use ccp_core::waiting_time::{ccdf, collapse_coefficient, pdf};
use ccp_core::Scalar;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

#[derive(Debug)]
pub struct Failure {
    pub identity: &'static str,
    pub inputs: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: u64,
    pub failures: Vec<Failure>,
}

struct Suite {
    result: SuiteResult,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Self {
            result: SuiteResult {
                name,
                cases: 0,
                failures: Vec::new(),
            },
        }
    }

    fn check<T: PartialEq + std::fmt::Display>(
        &mut self,
        identity: &'static str,
        inputs: String,
        lhs: T,
        rhs: T,
    ) {
        self.result.cases += 1;
        if lhs != rhs {
            self.result.failures.push(Failure {
                identity,
                inputs,
                lhs: lhs.to_string(),
                rhs: rhs.to_string(),
            });
        }
    }

    fn finish(self) -> SuiteResult {
        self.result
    }
}

fn pops_for(n: usize, trials: u32, seed: u64) -> Vec<Popularity<BigRational>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ ((n as u64) << 24));
    (0..trials)
        .map(|_| Popularity::random(n, &mut rng).unwrap())
        .collect()
}

fn rat(num: i64, den: i64) -> BigRational {
    BigRational::ratio(num, den)
}

/// Runs every suite; deterministic for a fixed seed.
pub fn run_suites(n_max: usize, trials: u32, seed: u64) -> Vec<SuiteResult> {
    vec![
        collapse_identity_grid(n_max),
        closed_power_sums(n_max, trials, seed),
        conditioned_closed_forms(n_max, trials, seed),
        split_identities(n_max, trials, seed),
        decomposition_oracle(n_max, trials, seed),
        uniform_weight_agreement(n_max),
        alternating_sum_zero(n_max, trials, seed),
        tail_probability_one(n_max, trials, seed),
        small_sum_reduction(n_max, trials, seed),
    ]
}

fn collapse_identity_grid(n_max: usize) -> SuiteResult {
    let mut suite = Suite::new("collapse-identity-grid");
    for n in 1..=n_max {
        for c in 1..=n {
            for k in 0..c {
                for u in 0..=k {
                    let expected = BigInt::from(u64::from(u == k));
                    suite.check(
                        "alternating binomial collapse",
                        format!("n={n}, c={c}, k={k}, u={u}"),
                        collapse_coefficient(n, c, k, u).unwrap(),
                        expected,
                    );
                }
            }
        }
    }
    suite.finish()
}

fn closed_power_sums(n_max: usize, trials: u32, seed: u64) -> SuiteResult {
    let mut suite = Suite::new("closed-power-sums");
    for n in 2..=n_max {
        for (t, pop) in pops_for(n, trials, seed).iter().enumerate() {
            for j in 0..=n {
                let inputs = format!("n={n}, trial={t}, j={j}");
                let s1 = power_sum_bruteforce(pop, j, 1).unwrap();
                suite.check(
                    "first-power closed form C(n-1, j-1)",
                    inputs.clone(),
                    s1.clone(),
                    BigRational::from_bigint(&closed_power_sum_k1(n, j).unwrap()),
                );
                if j < n {
                    let s1_next = power_sum_bruteforce(pop, j + 1, 1).unwrap();
                    suite.check(
                        "adjacent first-power sums total C(n, j)",
                        inputs.clone(),
                        s1_next.clone() + s1.clone(),
                        BigRational::from_bigint(&binomial(n as i64, j as i64)),
                    );
                    suite.check(
                        "complement symmetry of first-power sums",
                        inputs.clone(),
                        power_sum_bruteforce(pop, n - j, 1).unwrap(),
                        s1_next,
                    );
                }
                suite.check(
                    "square closed form",
                    inputs.clone(),
                    closed_power_sum_k2(pop, j).unwrap(),
                    power_sum_bruteforce(pop, j, 2).unwrap(),
                );
                if n >= 3 {
                    suite.check(
                        "cube closed form",
                        inputs,
                        closed_power_sum_k3(pop, j).unwrap(),
                        power_sum_bruteforce(pop, j, 3).unwrap(),
                    );
                }
            }
        }
        // uniform specializations C(n,j)(j/n)^2 and C(n,j)(j/n)^3
        let uniform = Popularity::<BigRational>::uniform(n).unwrap();
        for j in 0..=n {
            let count = BigRational::from_bigint(&binomial(n as i64, j as i64));
            let ratio = rat(j as i64, n as i64);
            suite.check(
                "uniform square identity",
                format!("n={n}, j={j}"),
                closed_power_sum_k2(&uniform, j).unwrap(),
                count.clone() * ratio.power(2),
            );
            if n >= 3 {
                suite.check(
                    "uniform cube identity",
                    format!("n={n}, j={j}"),
                    closed_power_sum_k3(&uniform, j).unwrap(),
                    count * ratio.power(3),
                );
            }
        }
    }
    suite.finish()
}

fn conditioned_closed_forms(n_max: usize, trials: u32, seed: u64) -> SuiteResult {
    let mut suite = Suite::new("conditioned-closed-forms");
    for n in 2..=n_max {
        for (t, pop) in pops_for(n, trials, seed ^ 0x10).iter().enumerate() {
            for l in 1..=n {
                for j in 1..n {
                    suite.check(
                        "excluding closed form (1-p_l) C(n-2, j-1)",
                        format!("n={n}, trial={t}, l={l}, j={j}"),
                        closed_power_sum_k1_excluding(pop, l, j).unwrap(),
                        power_sum_conditioned(pop, l, j, 1, Conditioning::Exclude).unwrap(),
                    );
                }
                if n >= 3 {
                    for j in 1..=n {
                        suite.check(
                            "including square closed form",
                            format!("n={n}, trial={t}, l={l}, j={j}"),
                            closed_power_sum_k2_including(pop, l, j).unwrap(),
                            power_sum_conditioned(pop, l, j, 2, Conditioning::Include).unwrap(),
                        );
                    }
                }
                for j in 0..=n {
                    for k in 0..=3u32 {
                        let included =
                            power_sum_conditioned(pop, l, j, k, Conditioning::Include).unwrap();
                        let excluded =
                            power_sum_conditioned(pop, l, j, k, Conditioning::Exclude).unwrap();
                        suite.check(
                            "include/exclude partition the subset family",
                            format!("n={n}, trial={t}, l={l}, j={j}, k={k}"),
                            included + excluded,
                            power_sum_bruteforce(pop, j, k).unwrap(),
                        );
                    }
                }
            }
        }
    }
    suite.finish()
}

fn split_identities(n_max: usize, trials: u32, seed: u64) -> SuiteResult {
    let mut suite = Suite::new("split-identities");
    for n in 2..=n_max {
        for (t, pop) in pops_for(n, trials, seed ^ 0x20).iter().enumerate() {
            let sum_sq = pop.sum_of_powers(2);
            for j in 0..=n {
                for k in 0..=4u32 {
                    let inputs = format!("n={n}, trial={t}, j={j}, k={k}");
                    let mut excluded_mix = rat(0, 1);
                    let mut included_mix = rat(0, 1);
                    for l in 1..=n {
                        let p = pop.prob(l).unwrap().clone();
                        excluded_mix += p.clone()
                            * power_sum_conditioned(pop, l, j, k, Conditioning::Exclude).unwrap();
                        included_mix +=
                            p * power_sum_conditioned(pop, l, j, k, Conditioning::Include).unwrap();
                    }
                    suite.check(
                        "complement weighting equals the excluding mixture",
                        inputs.clone(),
                        power_sum_with_complement(pop, j, k).unwrap(),
                        excluded_mix,
                    );
                    if j >= 1 {
                        suite.check(
                            "power increment equals the including mixture",
                            inputs,
                            power_sum_bruteforce(pop, j, k + 1).unwrap(),
                            included_mix,
                        );
                    }
                }
                // weighted first-power sum has a popularity-split closed form
                let weighted = power_sum_with_complement(pop, j, 1).unwrap();
                suite.check(
                    "complement-weighted closed form",
                    format!("n={n}, trial={t}, j={j}"),
                    weighted.clone(),
                    BigRational::from_bigint(&binomial(n as i64 - 2, j as i64 - 1))
                        * (rat(1, 1) - sum_sq.clone()),
                );
                if j < n {
                    let shifted = power_sum_bruteforce(pop, j + 1, 2).unwrap()
                        - sum_sq.clone() * power_sum_bruteforce(pop, j + 1, 1).unwrap();
                    suite.check(
                        "complement weight shifts one subset size up",
                        format!("n={n}, trial={t}, j={j}"),
                        weighted,
                        shifted,
                    );
                }
            }
        }
    }
    suite.finish()
}

fn decomposition_oracle(n_max: usize, trials: u32, seed: u64) -> SuiteResult {
    let mut suite = Suite::new("decomposition-oracle");
    for n in 2..=n_max {
        for (t, pop) in pops_for(n, trials, seed ^ 0x30).iter().enumerate() {
            for k in 1..n as u32 {
                let table = DecompositionWeights::from_popularity(pop, k).unwrap();
                suite.check(
                    "top weight is 1",
                    format!("n={n}, trial={t}, k={k}"),
                    table.weight(k).clone(),
                    rat(1, 1),
                );
                for j in 0..=n {
                    suite.check(
                        "decomposition evaluates to the oracle",
                        format!("n={n}, trial={t}, k={k}, j={j}"),
                        table.evaluate(j).unwrap(),
                        power_sum_bruteforce(pop, j, k).unwrap(),
                    );
                }
            }
        }
    }
    suite.finish()
}

fn uniform_weight_agreement(n_max: usize) -> SuiteResult {
    let mut suite = Suite::new("uniform-weight-agreement");
    for n in 2..=n_max.max(2) {
        let pop = Popularity::<BigRational>::uniform(n).unwrap();
        for k in 1..n as u32 {
            let general = DecompositionWeights::from_popularity(&pop, k).unwrap();
            let uniform = DecompositionWeights::<BigRational>::uniform(n, k).unwrap();
            for u in 1..=k {
                suite.check(
                    "general weights reduce to the Stirling form",
                    format!("n={n}, k={k}, u={u}"),
                    general.weight(u).clone(),
                    uniform.weight(u).clone(),
                );
            }
        }
    }
    suite.finish()
}

fn alternating_sum_zero(n_max: usize, trials: u32, seed: u64) -> SuiteResult {
    let mut suite = Suite::new("alternating-sum-zero");
    for n in 2..=n_max {
        for (t, pop) in pops_for(n, trials, seed ^ 0x40).iter().enumerate() {
            for k in 0..n as u32 {
                suite.check(
                    "signed power sums over all subsets cancel",
                    format!("n={n}, trial={t}, k={k}"),
                    alternating_power_sum(pop, k).unwrap(),
                    rat(0, 1),
                );
            }
        }
    }
    suite.finish()
}

fn tail_probability_one(n_max: usize, trials: u32, seed: u64) -> SuiteResult {
    let mut suite = Suite::new("tail-probability-one");
    for n in 2..=n_max {
        for (t, pop) in pops_for(n, trials, seed ^ 0x50).iter().enumerate() {
            for c in 1..=n {
                for k in 0..c as u64 {
                    let inputs = format!("n={n}, trial={t}, c={c}, k={k}");
                    suite.check(
                        "tail probability is 1 below c",
                        inputs.clone(),
                        ccdf(pop, c, k).unwrap(),
                        rat(1, 1),
                    );
                    suite.check(
                        "pdf vanishes below c",
                        inputs,
                        pdf(pop, c, k).unwrap(),
                        rat(0, 1),
                    );
                }
            }
        }
    }
    suite.finish()
}

fn small_sum_reduction(n_max: usize, trials: u32, seed: u64) -> SuiteResult {
    let mut suite = Suite::new("small-sum-reduction");
    for n in 3..=n_max {
        for (t, pop) in pops_for(n, trials, seed ^ 0x60).iter().enumerate() {
            for k in 1..n as u32 {
                let small = SmallPowerSums::compute(pop, k).unwrap();
                for j in (k as usize + 1)..=n {
                    let mut combined = rat(0, 1);
                    for q in 1..=k {
                        let coeff: BigRational = reduction_coefficient(n, k, j, q).unwrap();
                        combined += coeff * small.get(q).clone();
                    }
                    let oracle = power_sum_bruteforce(pop, j, k).unwrap();
                    suite.check(
                        "reduction coefficients rebuild the large sum",
                        format!("n={n}, trial={t}, k={k}, j={j}"),
                        combined,
                        oracle.clone(),
                    );
                    suite.check(
                        "fast path equals brute force",
                        format!("n={n}, trial={t}, k={k}, j={j}"),
                        power_sum_fast(pop, j, k).unwrap(),
                        oracle,
                    );
                }
            }
        }
    }
    suite.finish()
}
