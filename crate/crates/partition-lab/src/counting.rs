//! Exact counting of integer partitions with bounded part count and part size.
//!
//! The central object is [`CountCache`], a lazily grown table of exact
//! big-integer counts. `count_at_most(n, m)` is the number of partitions of
//! `n` into at most `m` parts; `count_bounded(n, m, b)` additionally caps
//! every part at `b`; `count_with_largest(n, m, k1)` fixes the largest part
//! exactly. All three agree with brute-force enumeration (see tests) and with
//! one another through the identities
//!
//! ```text
//! count_bounded(n, m, b) = count_bounded(n, m, b-1) + count_bounded(n-b, m-1, b)
//! count_with_largest(n, m, k1) = count_bounded(n - k1, m - 1, k1)
//! count_at_most(n, m) = count_bounded(n, m, n)
//! ```

use num_bigint::BigUint;
use num_traits::{One, Zero};
use statrs::function::gamma::ln_gamma;
use std::collections::HashMap;
use std::sync::Arc;

/// log p(N) <= HR_CONSTANT * sqrt(N) for every N >= 1 (classical bound).
pub const HR_CONSTANT: f64 = 2.565099660323728; // pi * sqrt(2/3)

const DEFAULT_CELL_BUDGET: u64 = 100_000_000;

#[derive(Debug, thiserror::Error)]
pub enum CountError {
    #[error("parts must be positive and nonincreasing")]
    MalformedPartition,
    #[error("partition has {got} parts, cap is {cap}")]
    TooManyParts { got: usize, cap: usize },
    #[error("largest part {k1} outside [{lo}, {hi}]")]
    InvalidLargestPart { k1: u64, lo: u64, hi: u64 },
    #[error("table budget exceeded: {cells} cells requested, budget {budget}")]
    BudgetExceeded { cells: u64, budget: u64 },
    #[error("require 1 <= m <= n, got n={n} m={m}")]
    OutOfDomain { n: u64, m: u64 },
}

/// A partition of `n` into at most `m_cap` parts, stored as nonincreasing
/// positive parts (zero parts are not stored).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    parts: Vec<u64>,
    n: u64,
    m_cap: usize,
}

impl Partition {
    pub fn new(parts: Vec<u64>, m_cap: usize) -> Result<Self, CountError> {
        if parts.len() > m_cap {
            return Err(CountError::TooManyParts { got: parts.len(), cap: m_cap });
        }
        for w in parts.windows(2) {
            if w[0] < w[1] {
                return Err(CountError::MalformedPartition);
            }
        }
        if parts.iter().any(|&p| p == 0) {
            return Err(CountError::MalformedPartition);
        }
        let n = parts.iter().sum();
        Ok(Partition { parts, n, m_cap })
    }

    /// Skips validation; callers must supply sorted positive parts.
    pub(crate) fn from_sorted_unchecked(parts: Vec<u64>, m_cap: usize) -> Self {
        debug_assert!(parts.windows(2).all(|w| w[0] >= w[1]));
        debug_assert!(parts.iter().all(|&p| p > 0));
        debug_assert!(parts.len() <= m_cap);
        let n = parts.iter().sum();
        Partition { parts, n, m_cap }
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m_cap(&self) -> usize {
        self.m_cap
    }

    /// Largest part; 0 for the empty partition.
    pub fn largest(&self) -> u64 {
        self.parts.first().copied().unwrap_or(0)
    }

    /// Parts divided by n, padded with zeros to `m_cap` coordinates.
    pub fn normalized(&self) -> Vec<f64> {
        let n = self.n as f64;
        let mut v: Vec<f64> = self.parts.iter().map(|&p| p as f64 / n).collect();
        v.resize(self.m_cap, 0.0);
        v
    }
}

/// Residue parameter j = m + n - m*ceil(n/m), always in [1, m].
pub fn j_residue(n: u64, m: u64) -> u64 {
    assert!(m >= 1 && n >= 1);
    m + n - m * n.div_ceil(m)
}

/// Largest l for which the fixed-largest-part count has its exact closed
/// form: floor((1/(m-1)) * (n/m - m)). Negative when n < m^2.
pub fn exact_regime_cutoff(n: u64, m: u64) -> i64 {
    assert!(m >= 2);
    (n as i64 - (m * m) as i64).div_euclid((m * (m - 1)) as i64)
}

/// Natural log of a positive big integer, accurate to ~1 ulp of the mantissa.
pub fn ln_biguint(x: &BigUint) -> f64 {
    assert!(!x.is_zero(), "ln of zero count");
    let bits = x.bits();
    if bits <= 64 {
        return (u64::try_from(x).unwrap() as f64).ln();
    }
    let shift = bits - 64;
    let top: BigUint = x >> shift;
    (u64::try_from(&top).unwrap() as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Lazily grown exact count tables. Single-writer: grow through `&mut self`,
/// then share cheap read-only row handles with samplers. Cloning is cheap
/// (rows are shared) and gives each worker thread its own growable copy.
#[derive(Clone)]
pub struct CountCache {
    // rows[m][x] = partitions of x into parts <= m = partitions of x into at
    // most m parts (conjugation). Row values saturate: rows[m][x] is correct
    // even for m > x.
    rows: Vec<Arc<Vec<BigUint>>>,
    // prefix[m][x] = sum over y <= x of rows[m][y]
    prefix: Vec<Arc<Vec<BigUint>>>,
    bounded: HashMap<(u64, u64, u64), BigUint>,
    cum_with_largest: HashMap<(u64, u64, u64), Arc<Vec<BigUint>>>,
    cell_budget: u64,
}

impl Default for CountCache {
    fn default() -> Self {
        Self::new()
    }
}

impl CountCache {
    pub fn new() -> Self {
        CountCache {
            rows: vec![Arc::new(Vec::new())],
            prefix: vec![Arc::new(Vec::new())],
            bounded: HashMap::new(),
            cum_with_largest: HashMap::new(),
            cell_budget: DEFAULT_CELL_BUDGET,
        }
    }

    pub fn with_cell_budget(budget: u64) -> Self {
        let mut c = Self::new();
        c.cell_budget = budget;
        c
    }

    fn current_cells(&self) -> u64 {
        self.rows.iter().map(|r| r.len() as u64).sum()
    }

    /// Grow rows 1..=m to cover totals 0..=n.
    pub fn ensure(&mut self, n: u64, m: u64) -> Result<(), CountError> {
        let n = n as usize;
        let m = m as usize;
        let need = (m as u64 + 1) * (n as u64 + 1);
        if need > self.cell_budget && need > self.current_cells() {
            return Err(CountError::BudgetExceeded { cells: need, budget: self.cell_budget });
        }
        if self.rows[0].is_empty() {
            let mut row0 = vec![BigUint::zero(); 1];
            row0[0] = BigUint::one();
            self.rows[0] = Arc::new(row0);
            self.prefix[0] = Arc::new(vec![BigUint::one()]);
        }
        if self.rows[0].len() <= n {
            let row0 = Arc::make_mut(&mut self.rows[0]);
            row0.resize(n + 1, BigUint::zero());
            let pre0 = Arc::make_mut(&mut self.prefix[0]);
            pre0.resize(n + 1, BigUint::one());
        }
        for mm in 1..=m {
            if self.rows.len() <= mm {
                self.rows.push(Arc::new(Vec::new()));
                self.prefix.push(Arc::new(Vec::new()));
            }
            if self.rows[mm].len() > n {
                continue;
            }
            let start = self.rows[mm].len();
            let (head, tail) = self.rows.split_at_mut(mm);
            let prev = &head[mm - 1];
            let row = Arc::make_mut(&mut tail[0]);
            row.reserve(n + 1 - start);
            for x in start..=n {
                let mut v = prev[x].clone();
                if x >= mm {
                    v += &row[x - mm];
                }
                row.push(v);
            }
            let row = &self.rows[mm];
            let pre = Arc::make_mut(&mut self.prefix[mm]);
            let mut acc = if start == 0 { BigUint::zero() } else { pre[start - 1].clone() };
            pre.reserve(n + 1 - start);
            for x in start..=n {
                acc += &row[x];
                pre.push(acc.clone());
            }
        }
        Ok(())
    }

    /// Number of partitions of n into at most m parts.
    pub fn count_at_most(&mut self, n: u64, m: u64) -> Result<BigUint, CountError> {
        if n == 0 {
            return Ok(BigUint::one());
        }
        if m == 0 {
            return Ok(BigUint::zero());
        }
        let m = m.min(n);
        self.ensure(n, m)?;
        Ok(self.rows[m as usize][n as usize].clone())
    }

    /// Read-only handle to the row of at-most-`m` counts (index by total).
    /// The row must have been grown via `ensure` first.
    pub fn row_handle(&self, m: u64) -> Arc<Vec<BigUint>> {
        Arc::clone(&self.rows[m as usize])
    }

    /// Number of partitions of n into at most m parts, each part <= b.
    pub fn count_bounded(&mut self, n: u64, m: u64, b: u64) -> Result<BigUint, CountError> {
        if n == 0 {
            return Ok(BigUint::one());
        }
        let m = m.min(n);
        let b = b.min(n);
        if m == 0 || b == 0 {
            return Ok(BigUint::zero());
        }
        if b == n {
            return self.count_at_most(n, m);
        }
        let box_total = (m as u128) * (b as u128);
        if box_total < n as u128 {
            return Ok(BigUint::zero());
        }
        if box_total == n as u128 {
            return Ok(BigUint::one());
        }
        if m == 1 {
            // single part n > b
            return Ok(BigUint::zero());
        }
        if m == 2 {
            // pairs (a, n-a) with ceil(n/2) <= a <= b
            return Ok(BigUint::from(b - n.div_ceil(2) + 1));
        }
        if let Some(v) = self.bounded.get(&(n, m, b)) {
            return Ok(v.clone());
        }
        let result = if 2 * b >= n {
            // Every partition with largest part h > b has h > n/2, so its
            // completion is cap-free: subtract those from the unrestricted count.
            self.ensure(n, m)?;
            let total = self.rows[m as usize][n as usize].clone();
            let excess = self.prefix[(m - 1) as usize][(n - b - 1) as usize].clone();
            total - excess
        } else {
            let mut acc = BigUint::zero();
            for h in n.div_ceil(m)..=b {
                acc += self.count_bounded(n - h, m - 1, h)?;
            }
            acc
        };
        self.bounded.insert((n, m, b), result.clone());
        Ok(result)
    }

    /// Number of partitions of n into at most m parts with largest part
    /// exactly k1. Requires ceil(n/m) <= k1 <= n.
    pub fn count_with_largest(&mut self, n: u64, m: u64, k1: u64) -> Result<BigUint, CountError> {
        if n == 0 || m == 0 {
            return Err(CountError::OutOfDomain { n, m });
        }
        let lo = n.div_ceil(m);
        if k1 < lo || k1 > n {
            return Err(CountError::InvalidLargestPart { k1, lo, hi: n });
        }
        self.count_bounded(n - k1, m - 1, k1)
    }

    /// Partitions of n into exactly m strictly decreasing positive parts.
    /// Bijection: subtract (m, m-1, ..., 1) from the parts.
    pub fn strict_partition_count(&mut self, n: u64, m: u64) -> Result<BigUint, CountError> {
        let stair = m * (m + 1) / 2;
        if n < stair {
            return Ok(BigUint::zero());
        }
        self.count_at_most(n - stair, m)
    }

    /// Raw at-most row; callers must `ensure` coverage first.
    pub(crate) fn row_ref(&self, m: u64) -> &[BigUint] {
        &self.rows[m as usize]
    }

    /// Cumulative counts by largest part h for partitions of x into at most
    /// mm parts each <= cap: entry i covers h in [ceil(x/mm), ceil(x/mm)+i].
    /// Cached per state; used by the exact bounded sampler.
    pub fn largest_part_cumulative(
        &mut self,
        x: u64,
        mm: u64,
        cap: u64,
    ) -> Result<Arc<Vec<BigUint>>, CountError> {
        if let Some(t) = self.cum_with_largest.get(&(x, mm, cap)) {
            return Ok(Arc::clone(t));
        }
        let lo = x.div_ceil(mm);
        let hi = cap.min(x);
        debug_assert!(lo <= hi, "infeasible sampler state x={x} mm={mm} cap={cap}");
        let mut cum = Vec::with_capacity((hi + 1 - lo) as usize);
        let mut acc = BigUint::zero();
        for h in lo..=hi {
            acc += self.count_bounded(x - h, mm - 1, h)?;
            cum.push(acc.clone());
        }
        debug_assert_eq!(acc, self.count_bounded(x, mm, cap).unwrap());
        let arc = Arc::new(cum);
        self.cum_with_largest.insert((x, mm, cap), Arc::clone(&arc));
        Ok(arc)
    }

    pub fn bounded_entries(&self) -> &HashMap<(u64, u64, u64), BigUint> {
        &self.bounded
    }

    pub fn row_lengths(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.len()).collect()
    }

    /// Rebuilds a cache from persisted at-most rows: rectangular, row 0 the
    /// unit impulse, row 1 all ones. Prefix sums are recomputed. Returns
    /// None when the structural invariants fail.
    pub(crate) fn from_persisted_rows(rows: Vec<Vec<BigUint>>) -> Option<CountCache> {
        let width = rows.first()?.len();
        if width == 0 || rows.iter().any(|r| r.len() != width) {
            return None;
        }
        if !rows[0][0].is_one() || rows[0][1..].iter().any(|v| !v.is_zero()) {
            return None;
        }
        if let Some(r1) = rows.get(1) {
            if r1.iter().any(|v| !v.is_one()) {
                return None;
            }
        }
        let prefix = rows
            .iter()
            .map(|row| {
                let mut acc = BigUint::zero();
                let cum: Vec<BigUint> = row
                    .iter()
                    .map(|v| {
                        acc += v;
                        acc.clone()
                    })
                    .collect();
                Arc::new(cum)
            })
            .collect();
        Some(CountCache {
            rows: rows.into_iter().map(Arc::new).collect(),
            prefix,
            bounded: HashMap::new(),
            cum_with_largest: HashMap::new(),
            cell_budget: DEFAULT_CELL_BUDGET,
        })
    }
}

/// ln of count_at_most(x, m) for every x <= n, computed by a one-pass sieve
/// with O(n) transient big integers and no table retention. For workloads
/// whose full table would bust the cache budget.
pub fn log_at_most_row(n: u64, m: u64) -> Vec<f64> {
    let n = n as usize;
    let mut d = vec![BigUint::zero(); n + 1];
    d[0] = BigUint::one();
    for s in 1..=(m as usize).min(n.max(1)) {
        for x in s..=n {
            let (lo, hi) = d.split_at_mut(x);
            hi[0] += &lo[x - s];
        }
    }
    d.iter()
        .map(|c| if c.is_zero() { f64::NEG_INFINITY } else { ln_biguint(c) })
        .collect()
}

/// ln of count_at_most(n, k) for each k in `ks` (ascending), one sieve pass.
pub fn log_at_most_snapshots(n: u64, ks: &[u64]) -> Vec<f64> {
    debug_assert!(ks.windows(2).all(|w| w[0] < w[1]));
    let n = n as usize;
    let mut d = vec![BigUint::zero(); n + 1];
    d[0] = BigUint::one();
    let mut out = Vec::with_capacity(ks.len());
    let kmax = *ks.last().expect("at least one snapshot") as usize;
    for s in 1..=kmax {
        if s <= n {
            for x in s..=n {
                let (lo, hi) = d.split_at_mut(x);
                hi[0] += &lo[x - s];
            }
        }
        if ks.contains(&(s as u64)) {
            out.push(ln_biguint(&d[n]));
        }
    }
    out
}

/// ln of C(n-1, m-1) / m!, the small-m approximation to count_at_most(n, m).
/// Requires 1 <= m <= n.
pub fn erdos_lehner_log_estimate(n: u64, m: u64) -> Result<f64, CountError> {
    if m < 1 || m > n {
        return Err(CountError::OutOfDomain { n, m });
    }
    let (n, m) = (n as f64, m as f64);
    Ok(ln_gamma(n) - ln_gamma(m) - ln_gamma(n - m + 1.0) - ln_gamma(m + 1.0))
}

/// Certified upper bound on ln p(n) (unrestricted partitions): HR_CONSTANT * sqrt(n).
pub fn hr_log_upper_bound(n: u64) -> f64 {
    HR_CONSTANT * (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force oracle: count partitions of n into at most m parts, each <= cap.
    fn brute(n: u64, m: u64, cap: u64) -> u64 {
        if n == 0 {
            return 1;
        }
        if m == 0 {
            return 0;
        }
        let mut total = 0;
        for h in 1..=cap.min(n) {
            total += brute(n - h, m - 1, h);
        }
        total
    }

    /// Literal form of the table recurrence, memo-free, for cross-checking.
    fn literal_recurrence(n: u64, m: u64, b: u64) -> u64 {
        if n == 0 {
            return 1;
        }
        if m == 0 || b == 0 {
            return 0;
        }
        literal_recurrence(n, m, b - 1) + if n >= b { literal_recurrence(n - b, m - 1, b) } else { 0 }
    }

    fn as_u64(x: BigUint) -> u64 {
        u64::try_from(&x).unwrap()
    }

    #[test]
    fn at_most_examples() {
        let mut c = CountCache::new();
        assert_eq!(as_u64(c.count_at_most(0, 5).unwrap()), 1);
        assert_eq!(as_u64(c.count_at_most(7, 1).unwrap()), 1);
        assert_eq!(as_u64(c.count_at_most(5, 2).unwrap()), 3); // (5),(4,1),(3,2)
        assert_eq!(as_u64(c.count_at_most(10, 3).unwrap()), 14);
        assert_eq!(as_u64(c.count_at_most(20, 3).unwrap()), 44);
        assert_eq!(as_u64(c.count_at_most(10, 10).unwrap()), brute(10, 10, 10));
        assert_eq!(as_u64(c.count_at_most(10, 10).unwrap()), 42);
        // m > n clamps
        assert_eq!(as_u64(c.count_at_most(10, 100).unwrap()), 42);
    }

    #[test]
    fn bounded_examples() {
        let mut c = CountCache::new();
        assert_eq!(as_u64(c.count_bounded(5, 2, 3).unwrap()), 1); // (3,2)
        assert_eq!(as_u64(c.count_bounded(4, 2, 2).unwrap()), 1); // (2,2)
        assert_eq!(as_u64(c.count_bounded(6, 3, 2).unwrap()), 1); // (2,2,2)
        assert_eq!(as_u64(c.count_bounded(7, 3, 2).unwrap()), 0);
        for n in 0..=30u64 {
            for m in 0..=8 {
                for b in 0..=10 {
                    assert_eq!(
                        as_u64(c.count_bounded(n, m, b).unwrap()),
                        brute(n, m.min(n), b.min(n)),
                        "n={n} m={m} b={b}"
                    );
                }
            }
        }
    }

    #[test]
    fn with_largest_examples() {
        let mut c = CountCache::new();
        assert_eq!(as_u64(c.count_with_largest(10, 3, 4).unwrap()), 2); // (4,4,2),(4,3,3)
        assert_eq!(as_u64(c.count_with_largest(12, 3, 4).unwrap()), 1); // (4,4,4)
        assert_eq!(as_u64(c.count_with_largest(9, 1, 9).unwrap()), 1);
        assert!(matches!(
            c.count_with_largest(12, 3, 3),
            Err(CountError::InvalidLargestPart { .. })
        ));
        assert!(c.count_with_largest(10, 3, 11).is_err());
    }

    #[test]
    fn largest_part_counts_partition_the_total() {
        let mut c = CountCache::new();
        for n in 1..=60u64 {
            for m in 1..=6 {
                let total = c.count_at_most(n, m).unwrap();
                let mut acc = BigUint::zero();
                for k1 in n.div_ceil(m)..=n {
                    acc += c.count_with_largest(n, m, k1).unwrap();
                }
                assert_eq!(acc, total, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn exact_regime_identity_and_inequality() {
        // equality up to the cutoff, one-sided inequality beyond
        let mut c = CountCache::new();
        for n in 1..=80u64 {
            for m in 2..=6u64 {
                let j = j_residue(n, m);
                assert!((1..=m).contains(&j));
                let cutoff = exact_regime_cutoff(n, m);
                let base = n.div_ceil(m);
                for l in 0..=(n - base) {
                    let lhs = c.count_with_largest(n, m, base + l).unwrap();
                    let rhs = c.count_at_most(m * (l + 1) - j, m - 1).unwrap();
                    if (l as i64) <= cutoff {
                        assert_eq!(lhs, rhs, "n={n} m={m} l={l}");
                    } else {
                        assert!(lhs <= rhs, "n={n} m={m} l={l}");
                    }
                }
            }
        }
    }

    #[test]
    fn j_residue_examples() {
        assert_eq!(j_residue(10, 3), 1);
        assert_eq!(j_residue(12, 3), 3); // n divisible by m -> j = m
        assert_eq!(j_residue(3001, 3), 1);
        assert_eq!(j_residue(10_000, 4), 4);
    }

    #[test]
    fn strict_bijection_matches_enumeration() {
        let mut c = CountCache::new();
        // strict partitions of n into exactly m parts, brute force
        fn strict_brute(n: u64, m: u64, cap: u64) -> u64 {
            if m == 0 {
                return u64::from(n == 0);
            }
            let mut total = 0;
            // largest part must be at least m to leave room for m-1 strictly
            // smaller positive parts
            for h in m..=cap.min(n) {
                total += strict_brute(n - h, m - 1, h - 1);
            }
            total
        }
        for n in 1..=40u64 {
            for m in 1..=6 {
                assert_eq!(
                    as_u64(c.strict_partition_count(n, m).unwrap()),
                    strict_brute(n, m, n),
                    "n={n} m={m}"
                );
            }
        }
    }

    #[test]
    fn log_helpers_match_tables() {
        let mut c = CountCache::new();
        let row = log_at_most_row(200, 5);
        for x in 1..=200u64 {
            let exact = ln_biguint(&c.count_at_most(x, 5).unwrap());
            assert!((row[x as usize] - exact).abs() < 1e-12);
        }
        let snaps = log_at_most_snapshots(150, &[2, 5, 9]);
        for (i, k) in [2u64, 5, 9].iter().enumerate() {
            let exact = ln_biguint(&c.count_at_most(150, *k).unwrap());
            assert!((snaps[i] - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn erdos_lehner_examples() {
        let e = erdos_lehner_log_estimate(100, 3).unwrap();
        assert!((e - (4851.0f64 / 6.0).ln()).abs() < 1e-9);
        assert_eq!(erdos_lehner_log_estimate(17, 1).unwrap(), 0.0);
        assert!((erdos_lehner_log_estimate(5, 2).unwrap() - 2.0f64.ln()).abs() < 1e-12);
        assert!(erdos_lehner_log_estimate(3, 5).is_err());
    }

    #[test]
    fn hr_bound_dominates_exact_log() {
        let mut c = CountCache::new();
        assert!((hr_log_upper_bound(1) - 2.565099660323728).abs() < 1e-12);
        for n in [1u64, 10, 100, 400] {
            let exact = ln_biguint(&c.count_at_most(n, n).unwrap());
            assert!(exact < hr_log_upper_bound(n), "n={n}");
        }
        // p(100) = 190569292
        let p100 = c.count_at_most(100, 100).unwrap();
        assert_eq!(p100, BigUint::from(190_569_292u64));
        assert!((hr_log_upper_bound(100) - 25.65099660323728).abs() < 1e-10);
    }

    #[test]
    fn ln_biguint_accuracy() {
        let mut c = CountCache::new();
        let big = c.count_at_most(5000, 5000).unwrap(); // ~ e^180
        let ln = ln_biguint(&big);
        // compare against bit length bracket: 2^(bits-1) <= x < 2^bits
        let bits = big.bits() as f64;
        assert!(ln >= (bits - 1.0) * std::f64::consts::LN_2);
        assert!(ln <= bits * std::f64::consts::LN_2);
        assert_eq!(ln_biguint(&BigUint::from(1u8)), 0.0);
        let e20 = ln_biguint(&BigUint::from(485_165_195u64)); // ~ e^20
        assert!((e20 - 20.0).abs() < 1e-6);
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![4, 3, 3], 3).is_ok());
        assert!(Partition::new(vec![3, 4], 3).is_err());
        assert!(Partition::new(vec![3, 0], 3).is_err());
        assert!(Partition::new(vec![2, 1, 1], 2).is_err());
        let p = Partition::new(vec![4, 2], 3).unwrap();
        assert_eq!(p.n(), 6);
        assert_eq!(p.largest(), 4);
        assert_eq!(p.normalized(), vec![4.0 / 6.0, 2.0 / 6.0, 0.0]);
        let empty = Partition::new(vec![], 4).unwrap();
        assert_eq!(empty.n(), 0);
        assert_eq!(empty.largest(), 0);
    }

    #[test]
    fn budget_guard_refuses_oversized_tables() {
        let mut c = CountCache::with_cell_budget(1000);
        assert!(matches!(
            c.count_at_most(10_000, 50),
            Err(CountError::BudgetExceeded { .. })
        ));
        // small queries still fine
        assert_eq!(as_u64(c.count_at_most(10, 3).unwrap()), 14);
    }

    proptest! {
        #[test]
        fn bounded_matches_literal_recurrence(n in 0u64..28, m in 0u64..9, b in 0u64..28) {
            let mut c = CountCache::new();
            prop_assert_eq!(
                as_u64(c.count_bounded(n, m, b).unwrap()),
                literal_recurrence(n, m, b)
            );
        }

        #[test]
        fn cap_at_total_is_at_most(n in 0u64..120, m in 0u64..12) {
            let mut c = CountCache::new();
            prop_assert_eq!(c.count_bounded(n, m, n).unwrap(), c.count_at_most(n, m).unwrap());
        }

        #[test]
        fn monotone_in_all_arguments(n in 1u64..60, m in 1u64..8, b in 1u64..60) {
            let mut c = CountCache::new();
            let base = c.count_bounded(n, m, b).unwrap();
            prop_assert!(c.count_bounded(n, m + 1, b).unwrap() >= base);
            prop_assert!(c.count_bounded(n, m, b + 1).unwrap() >= base);
        }
    }
}
