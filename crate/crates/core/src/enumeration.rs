//! Partition counting and the number of analogous families per dimension.
//!
//! All counts are arbitrary-precision: P(200) already overflows 64 bits.

use num::bigint::BigUint;
use num::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EnumError {
    #[error("dimension {m} exceeds the family-count cap {cap}")]
    CapExceeded { m: usize, cap: usize },
    #[error("K = {k} must divide m = {m}")]
    NotDivisible { m: usize, k: usize },
    #[error("K must be positive")]
    ZeroK,
}

/// Memoized table of P_k(m), the number of partitions of m into exactly k
/// positive nonincreasing parts.
///
/// Built from the recurrence P_k(m) = P_k(m-k) + P_{k-1}(m-1) with the base
/// cases P_0(0) = 1, P_0(m>0) = 0, and P_k(m) = 0 for k > m.
#[derive(Debug, Clone)]
pub struct PartitionTable {
    max_m: usize,
    // values[k][m]
    values: Vec<Vec<BigUint>>,
}

impl PartitionTable {
    pub fn new(max_m: usize) -> Self {
        let mut values = vec![vec![BigUint::zero(); max_m + 1]; max_m + 1];
        values[0][0] = BigUint::one();
        for k in 1..=max_m {
            for m in k..=max_m {
                let a = if m >= k {
                    values[k][m - k].clone()
                } else {
                    BigUint::zero()
                };
                let b = values[k - 1][m - 1].clone();
                values[k][m] = a + b;
            }
        }
        Self { max_m, values }
    }

    pub fn max_m(&self) -> usize {
        self.max_m
    }

    /// P_k(m); zero when k > m or k = 0 (except P_0(0) = 1).
    pub fn partition_k(&self, m: usize, k: usize) -> BigUint {
        if k > self.max_m || m > self.max_m {
            panic!("partition table built up to {}, asked for P_{k}({m})", self.max_m);
        }
        self.values[k][m].clone()
    }

    /// P(m) = sum of P_k(m) over k = 1..=m, with P(0) = 1 (empty partition).
    pub fn partition_total(&self, m: usize) -> BigUint {
        if m == 0 {
            return BigUint::one();
        }
        let mut acc = BigUint::zero();
        for k in 1..=m {
            acc += &self.values[k][m];
        }
        acc
    }
}

/// Count of partitions of m into exactly k parts.
pub fn partition_k(m: usize, k: usize) -> BigUint {
    PartitionTable::new(m.max(k)).partition_k(m, k)
}

/// Total number of partitions of m.
pub fn partition_total(m: usize) -> BigUint {
    PartitionTable::new(m).partition_total(m)
}

/// Default cap on the family-count dimension.
pub const DEFAULT_FAMILY_CAP: usize = 200;

/// Number of analogous families for dimension m: over every count K of
/// distinct eigenvalues and every nonincreasing tuple of algebraic
/// multiplicities summing to m, the product of P(alpha_k).
///
/// Evaluated through the generating function
/// `prod_a 1/(1 - P(a) x^a)`, whose x^m coefficient is exactly that sum of
/// products (a nonincreasing tuple is a multiset of parts); direct tuple
/// enumeration is infeasible at the default cap. The verbatim enumeration is
/// kept as [`family_count_enumerated`] for cross-checking.
pub fn family_count(m: usize) -> Result<BigUint, EnumError> {
    family_count_with_cap(m, DEFAULT_FAMILY_CAP)
}

pub fn family_count_with_cap(m: usize, cap: usize) -> Result<BigUint, EnumError> {
    if m > cap {
        return Err(EnumError::CapExceeded { m, cap });
    }
    let table = PartitionTable::new(m);
    let mut dp = vec![BigUint::zero(); m + 1];
    dp[0] = BigUint::one();
    for a in 1..=m {
        let pa = table.partition_total(a);
        for s in a..=m {
            let add = &pa * &dp[s - a];
            dp[s] += add;
        }
    }
    Ok(dp[m].clone())
}

/// Verbatim evaluation: enumerate every nonincreasing multiplicity tuple and
/// sum the products of P values. Exponential in m; cross-check only.
pub fn family_count_enumerated(m: usize) -> BigUint {
    let table = PartitionTable::new(m);
    let mut total = BigUint::zero();
    let mut parts: Vec<usize> = Vec::new();
    fn rec(
        remaining: usize,
        max_part: usize,
        parts: &mut Vec<usize>,
        table: &PartitionTable,
        total: &mut BigUint,
    ) {
        if remaining == 0 {
            let mut prod = BigUint::one();
            for &p in parts.iter() {
                prod *= table.partition_total(p);
            }
            *total += prod;
            return;
        }
        for next in (1..=remaining.min(max_part)).rev() {
            parts.push(next);
            rec(remaining - next, next, parts, table, total);
            parts.pop();
        }
    }
    rec(m, m, &mut parts, &table, &mut total);
    total
}

/// Families counted as unordered multisets of block partitions, so equal
/// multiplicities with distinct partitions are not double counted. The
/// generating function is `prod_a (1 - x^a)^(-P(a))`.
#[allow(clippy::needless_range_loop)] // s indexes both dp and next
pub fn family_count_unordered(m: usize, cap: usize) -> Result<BigUint, EnumError> {
    if m > cap {
        return Err(EnumError::CapExceeded { m, cap });
    }
    let table = PartitionTable::new(m);
    let mut dp = vec![BigUint::zero(); m + 1];
    dp[0] = BigUint::one();
    for a in 1..=m {
        let pa = table.partition_total(a);
        let mut next = vec![BigUint::zero(); m + 1];
        for s in 0..=m {
            if dp[s].is_zero() {
                continue;
            }
            // Choose j blocks of total size a each (a multiset of j items
            // from P(a) kinds).
            let mut choose = BigUint::one();
            let mut j = 0usize;
            loop {
                let target = s + a * j;
                if target > m {
                    break;
                }
                let add = &dp[s] * &choose;
                next[target] += add;
                j += 1;
                // C(P + j - 1, j) built incrementally; division is exact.
                let numer = &pa + BigUint::from(j - 1);
                choose = choose * numer / BigUint::from(j);
            }
        }
        dp = next;
    }
    Ok(dp[m].clone())
}

/// Closed-form asymptotic estimate of the family count when all K
/// multiplicities equal m/K, with the natural log alongside since the value
/// itself overflows f64 quickly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticEstimate {
    pub value: f64,
    pub ln_value: f64,
}

/// `[exp(pi sqrt(2(m/K)/3)) / (4 sqrt(3) (m/K))]^K`; requires K | m.
pub fn asymptotic_family_count(m: usize, k: usize) -> Result<AsymptoticEstimate, EnumError> {
    if k == 0 {
        return Err(EnumError::ZeroK);
    }
    if !m.is_multiple_of(k) {
        return Err(EnumError::NotDivisible { m, k });
    }
    let n = (m / k) as f64;
    let ln_factor = std::f64::consts::PI * (2.0 * n / 3.0).sqrt() - (4.0 * 3f64.sqrt() * n).ln();
    let ln_value = k as f64 * ln_factor;
    Ok(AsymptoticEstimate {
        value: ln_value.exp(),
        ln_value,
    })
}

/// Ratio of the K = 1 asymptotic estimate to the exact partition count.
pub fn asymptotic_ratio_to_exact(m: usize) -> f64 {
    let est = asymptotic_family_count(m, 1).unwrap();
    est.value / count_to_f64(&partition_total(m))
}

/// Lossy conversion for ratio displays.
pub fn count_to_f64(v: &BigUint) -> f64 {
    v.to_f64().unwrap_or(f64::INFINITY)
}
