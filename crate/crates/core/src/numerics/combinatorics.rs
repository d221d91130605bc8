//! Cached combinatorial primitives: binomial coefficients, Stirling numbers
//! of the second kind, and factorials, all as exact big integers.
//!
//! Binomial coefficients follow the conventions used throughout the crate:
//! `C(a, b) = 0` whenever `b > a` or either argument is negative, and
//! `C(a, a) = 1` for `a >= 0`. The caches grow lazily and are shared behind
//! a read-write lock, so warmed-up lookups only take the read path.

use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Triangular Pascal cache; row `a` holds `C(a, 0..=a)`.
pub struct BinomialTable {
    rows: Vec<Vec<BigInt>>,
}

impl BinomialTable {
    pub fn new() -> Self {
        Self {
            rows: vec![vec![BigInt::one()]],
        }
    }

    pub fn with_rows(n_max: usize) -> Self {
        let mut table = Self::new();
        table.ensure(n_max);
        table
    }

    /// Largest cached `a`.
    pub fn n_max(&self) -> usize {
        self.rows.len() - 1
    }

    /// Grows the cache so that all rows up to `n_max` exist.
    pub fn ensure(&mut self, n_max: usize) {
        while self.rows.len() <= n_max {
            let prev = self.rows.last().expect("at least row 0");
            let a = self.rows.len();
            let mut row = Vec::with_capacity(a + 1);
            row.push(BigInt::one());
            for b in 1..a {
                row.push(&prev[b - 1] + &prev[b]);
            }
            row.push(BigInt::one());
            self.rows.push(row);
        }
    }

    /// `C(a, b)` with sign conventions applied. `a` must already be cached.
    pub fn get(&self, a: i64, b: i64) -> BigInt {
        if a < 0 || b < 0 || b > a {
            return BigInt::zero();
        }
        let a = a as usize;
        assert!(
            a <= self.n_max(),
            "row {a} not cached (n_max = {})",
            self.n_max()
        );
        self.rows[a][b as usize].clone()
    }
}

impl Default for BinomialTable {
    fn default() -> Self {
        Self::new()
    }
}

fn binomial_cache() -> &'static RwLock<BinomialTable> {
    static CACHE: OnceLock<RwLock<BinomialTable>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(BinomialTable::new()))
}

/// Binomial coefficient `C(a, b)`: zero when `b > a` or either argument is
/// negative (in particular `C(a, a) = 0` for `a < 0`), else the usual value.
pub fn binomial(a: i64, b: i64) -> BigInt {
    if a < 0 || b < 0 || b > a {
        return BigInt::zero();
    }
    let lock = binomial_cache();
    {
        let table = lock.read().expect("binomial cache poisoned");
        if a as usize <= table.n_max() {
            return table.rows[a as usize][b as usize].clone();
        }
    }
    let mut table = lock.write().expect("binomial cache poisoned");
    table.ensure(a as usize);
    table.rows[a as usize][b as usize].clone()
}

fn stirling_cache() -> &'static RwLock<Vec<Vec<BigInt>>> {
    static CACHE: OnceLock<RwLock<Vec<Vec<BigInt>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(vec![vec![BigInt::one()]]))
}

/// Stirling number of the second kind `S(k, i)`: the number of partitions
/// of a k-set into i non-empty blocks. Zero for `i > k`; `S(0, 0) = 1`.
pub fn stirling2(k: usize, i: usize) -> BigInt {
    if i > k {
        return BigInt::zero();
    }
    let lock = stirling_cache();
    {
        let rows = lock.read().expect("stirling cache poisoned");
        if k < rows.len() {
            return rows[k][i].clone();
        }
    }
    let mut rows = lock.write().expect("stirling cache poisoned");
    while rows.len() <= k {
        let prev = rows.last().expect("at least row 0");
        let m = rows.len();
        let mut row = Vec::with_capacity(m + 1);
        row.push(BigInt::zero());
        for b in 1..m {
            row.push(BigInt::from(b) * &prev[b] + &prev[b - 1]);
        }
        row.push(BigInt::one());
        rows.push(row);
    }
    rows[k][i].clone()
}

/// `S(k, i)` computed with O(i) memory instead of the full triangular cache.
///
/// The pdf of the uniform popularity needs `S(k - 1, c - 1)` for trial
/// counts `k` far beyond any sensible cache size; only columns `0..=i`
/// feed the recurrence, so a rolling row of width `i + 1` suffices.
pub fn stirling2_rolling(k: u64, i: usize) -> BigInt {
    if (i as u64) > k {
        return BigInt::zero();
    }
    if k <= 512 {
        return stirling2(k as usize, i);
    }
    let width = i + 1;
    let mut row = vec![BigInt::zero(); width];
    row[0] = BigInt::one();
    for m in 1..=k {
        let top = width.min(m as usize + 1);
        for b in (1..top).rev() {
            let scaled = BigInt::from(b) * &row[b];
            row[b] = scaled + &row[b - 1];
        }
        row[0] = BigInt::zero();
    }
    row[i].clone()
}

fn factorial_cache() -> &'static RwLock<Vec<BigInt>> {
    static CACHE: OnceLock<RwLock<Vec<BigInt>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(vec![BigInt::one()]))
}

/// `m!` as an exact big integer.
pub fn factorial(m: usize) -> BigInt {
    let lock = factorial_cache();
    {
        let cache = lock.read().expect("factorial cache poisoned");
        if m < cache.len() {
            return cache[m].clone();
        }
    }
    let mut cache = lock.write().expect("factorial cache poisoned");
    while cache.len() <= m {
        let next = cache.last().expect("at least 0!") * BigInt::from(cache.len());
        cache.push(next);
    }
    cache[m].clone()
}
