//! Exact closed forms for the counting results: factor relations,
//! companions, factor pairs, atoms and blocks of decomposition posets, and
//! the subspace-pair counts for finite vector spaces.
//!
//! All arithmetic is arbitrary precision; every division is asserted exact.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One evaluated formula instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountReport {
    pub label: String,
    pub parameters: Vec<u64>,
    pub value: String,
}

impl CountReport {
    pub fn new(label: &str, parameters: &[u64], value: &BigUint) -> Self {
        CountReport {
            label: label.to_string(),
            parameters: parameters.to_vec(),
            value: value.to_string(),
        }
    }
}

pub fn factorial(n: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 2..=n {
        acc *= i;
    }
    acc
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn exact_div(num: BigUint, den: &BigUint) -> BigUint {
    let (q, r) = num.div_rem(den);
    assert!(r.is_zero(), "inexact division in counting formula");
    q
}

/// Regular partitions with `m` blocks of `n` elements: `(mn)!/(m!(n!)^m)`.
pub fn cf_factor_relations(m: u64, n: u64) -> BigUint {
    let den = factorial(m) * factorial(n).pow(m as u32);
    exact_div(factorial(m * n), &den)
}

/// Companions of a regular partition with `m` blocks of `n`: `(n!)^(m-1)`.
pub fn cf_companions(m: u64, n: u64) -> BigUint {
    factorial(n).pow(m.saturating_sub(1) as u32)
}

/// Factor pairs with the first spot having `m` blocks of `n`: `(mn)!/(m!n!)`.
pub fn cf_factor_pairs(m: u64, n: u64) -> BigUint {
    let den = factorial(m) * factorial(n);
    exact_div(factorial(m * n), &den)
}

/// Atoms of the decomposition poset of a `p^k`-element set:
/// `p^k! / (p! (p^(k-1))!)`.
pub fn cf_atoms_prime_power(p: u64, k: u32) -> Result<BigUint> {
    if !is_prime(p) {
        return Err(Error::NotPrime { value: p });
    }
    let pk = p.pow(k);
    let den = factorial(p) * factorial(p.pow(k - 1));
    Ok(exact_div(factorial(pk), &den))
}

/// Blocks of the decomposition poset of a `p^k`-element set:
/// `p^k! / (k! (p!)^k)`.
pub fn cf_blocks_prime_power(p: u64, k: u32) -> Result<BigUint> {
    if !is_prime(p) {
        return Err(Error::NotPrime { value: p });
    }
    let pk = p.pow(k);
    let den = factorial(k as u64) * factorial(p).pow(k);
    Ok(exact_div(factorial(pk), &den))
}

/// Blocks through each atom for a `p^k`-element set:
/// `p^(k-1)! / ((k-1)! (p!)^(k-1))`.
pub fn cf_blocks_per_atom(p: u64, k: u32) -> Result<BigUint> {
    if !is_prime(p) {
        return Err(Error::NotPrime { value: p });
    }
    let den = factorial((k - 1) as u64) * factorial(p).pow(k - 1);
    Ok(exact_div(factorial(p.pow(k - 1)), &den))
}

fn pow_u(n: u64, e: u32) -> BigUint {
    BigUint::from(n).pow(e)
}

/// Atoms of the poset of complementary-subspace pairs of a k-dimensional
/// space over an n-element field: `(n^k - 1)/(n - 1) * n^(k-1)`.
pub fn cf_vec_atoms(n: u64, k: u32) -> BigUint {
    let lines = exact_div(pow_u(n, k) - BigUint::one(), &(BigUint::from(n - 1)));
    lines * pow_u(n, k - 1)
}

/// Blocks: `prod_{i=0}^{k-1} (n^k - n^i) / (k! (n-1)^k)`.
pub fn cf_vec_blocks(n: u64, k: u32) -> BigUint {
    let mut num = BigUint::one();
    for i in 0..k {
        num *= pow_u(n, k) - pow_u(n, i);
    }
    let den = factorial(k as u64) * BigUint::from(n - 1).pow(k);
    exact_div(num, &den)
}

/// Blocks per atom: `prod_{i=1}^{k-1} (n^k - n^i) / ((k-1)! n^(k-1) (n-1)^(k-1))`.
pub fn cf_vec_blocks_per_atom(n: u64, k: u32) -> BigUint {
    let mut num = BigUint::one();
    for i in 1..k {
        num *= pow_u(n, k) - pow_u(n, i);
    }
    let den = factorial((k - 1) as u64) * pow_u(n, k - 1) * BigUint::from(n - 1).pow(k - 1);
    exact_div(num, &den)
}

/// For a set of `p^3` points: the number of induced linear-structure
/// subalgebras, how many contain each atom, and how many contain each block
/// (which is `(p-2)!`).
pub fn cf_zp_block_counts(p: u64) -> Result<(BigUint, BigUint, BigUint)> {
    if !is_prime(p) {
        return Err(Error::NotPrime { value: p });
    }
    let p3 = p * p * p;
    let total = {
        let den = BigUint::from(p3 - 1) * BigUint::from(p3 - p) * BigUint::from(p3 - p * p);
        exact_div(factorial(p3 - 1), &den)
    };
    let per_atom = {
        let p2 = p * p;
        let num = factorial(p2 - 1) * factorial(p - 2);
        let den = BigUint::from(p2 - 1) * BigUint::from(p2 - p);
        exact_div(num, &den)
    };
    let per_block = factorial(p.saturating_sub(2));
    Ok((total, per_atom, per_block))
}

/// For `|X| = pq` with primes `p <= q`: the index n with the poset equal to
/// MO_n, i.e. `(pq)!/(p!q!)`, halved when `p == q`.
pub fn cf_mo_n(p: u64, q: u64) -> Result<BigUint> {
    if !is_prime(p) {
        return Err(Error::NotPrime { value: p });
    }
    if !is_prime(q) {
        return Err(Error::NotPrime { value: q });
    }
    let mut v = cf_factor_pairs(p, q);
    if p == q {
        v = exact_div(v, &BigUint::from(2u32));
    }
    Ok(v)
}

/// The standard formula table emitted by the `formulas` command.
pub fn formula_table() -> Vec<CountReport> {
    let mut out = Vec::new();
    for (m, n) in [(2, 2), (2, 3), (2, 4), (3, 3), (9, 3)] {
        out.push(CountReport::new(
            "factor_relations",
            &[m, n],
            &cf_factor_relations(m, n),
        ));
        out.push(CountReport::new("companions", &[m, n], &cf_companions(m, n)));
        out.push(CountReport::new(
            "factor_pairs",
            &[m, n],
            &cf_factor_pairs(m, n),
        ));
    }
    for (p, k) in [(2u64, 2u32), (2, 3), (3, 2), (3, 3)] {
        out.push(CountReport::new(
            "atoms_prime_power",
            &[p, k as u64],
            &cf_atoms_prime_power(p, k).unwrap(),
        ));
        out.push(CountReport::new(
            "blocks_prime_power",
            &[p, k as u64],
            &cf_blocks_prime_power(p, k).unwrap(),
        ));
        out.push(CountReport::new(
            "blocks_per_atom",
            &[p, k as u64],
            &cf_blocks_per_atom(p, k).unwrap(),
        ));
    }
    for (n, k) in [(2u64, 2u32), (2, 3), (3, 2), (3, 3), (4, 3), (5, 3), (7, 3)] {
        out.push(CountReport::new("vec_atoms", &[n, k as u64], &cf_vec_atoms(n, k)));
        out.push(CountReport::new(
            "vec_blocks",
            &[n, k as u64],
            &cf_vec_blocks(n, k),
        ));
        out.push(CountReport::new(
            "vec_blocks_per_atom",
            &[n, k as u64],
            &cf_vec_blocks_per_atom(n, k),
        ));
    }
    for p in [2u64, 3, 5] {
        let (total, per_atom, per_block) = cf_zp_block_counts(p).unwrap();
        out.push(CountReport::new("zp_blocks", &[p], &total));
        out.push(CountReport::new("zp_blocks_per_atom", &[p], &per_atom));
        out.push(CountReport::new("zp_blocks_per_block", &[p], &per_block));
    }
    for (p, q) in [(2u64, 2u64), (2, 3), (3, 3)] {
        out.push(CountReport::new("mo_n", &[p, q], &cf_mo_n(p, q).unwrap()));
    }
    out
}

/// Helper for comparing closed forms against `usize` enumeration counts.
pub fn as_u64(v: &BigUint) -> Option<u64> {
    v.to_u64()
}
