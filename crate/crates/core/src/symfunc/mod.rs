//! Exact rational arithmetic and the weak-composition combinatorics behind
//! complete homogeneous symmetric polynomials and power sums.

mod rational;

pub use rational::{ParseRationalError, Rational};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

/// Largest degree accepted by the enumeration-based operations unless a
/// caller opts into a different [`DegreeCap`].
pub const DEFAULT_DEGREE_CAP: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymfuncError {
    #[error("degree {degree} exceeds the configured cap {cap}")]
    DegreeCapExceeded { degree: u32, cap: u32 },
    #[error("empty coefficient vector")]
    EmptyInput,
}

/// Upper bound on the degree of composition enumerations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegreeCap(pub u32);

impl Default for DegreeCap {
    fn default() -> Self {
        DegreeCap(DEFAULT_DEGREE_CAP)
    }
}

impl DegreeCap {
    pub fn check(self, degree: u32) -> Result<(), SymfuncError> {
        if degree > self.0 {
            Err(SymfuncError::DegreeCapExceeded { degree, cap: self.0 })
        } else {
            Ok(())
        }
    }
}

/// A weak composition `(k_1, ..., k_n)` of its degree `m = k_1 + ... + k_n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Composition {
    parts: Vec<u32>,
    degree: u32,
}

impl Composition {
    pub fn new(parts: Vec<u32>) -> Self {
        let degree = parts.iter().sum();
        Composition { parts, degree }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}

/// Stream over all weak compositions of `m` into `n` parts.
///
/// Order is lexicographically descending, starting from `(m, 0, ..., 0)` and
/// ending at `(0, ..., 0, m)`; for `n = 2, m = 2` that is `(2,0), (1,1), (0,2)`.
#[derive(Debug, Clone)]
pub struct Compositions {
    parts: Vec<u32>,
    done: bool,
}

/// Enumerates every element of `W_{n,m}` exactly once.
///
/// # Panics
///
/// Panics if `n == 0`.
pub fn compositions(n: usize, m: u32) -> Compositions {
    assert!(n >= 1, "compositions need at least one part");
    let mut parts = vec![0; n];
    parts[0] = m;
    Compositions { parts, done: false }
}

impl Iterator for Compositions {
    type Item = Composition;

    fn next(&mut self) -> Option<Composition> {
        if self.done {
            return None;
        }
        let current = Composition::new(self.parts.clone());
        let n = self.parts.len();
        // Rightmost non-last slot that can give one unit to its successor.
        match (0..n.saturating_sub(1)).rev().find(|&i| self.parts[i] > 0) {
            None => self.done = true,
            Some(i) => {
                let tail: u32 = self.parts[i + 1..].iter().sum();
                self.parts[i] -= 1;
                self.parts[i + 1] = tail + 1;
                for p in &mut self.parts[i + 2..] {
                    *p = 0;
                }
            }
        }
        Some(current)
    }
}

/// `binomial(n, k)` over arbitrary-precision integers.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `m! / (k_1! ... k_n!)` for the composition's parts.
pub fn multinomial(c: &Composition) -> BigUint {
    let mut acc = BigUint::one();
    let mut running = 0u64;
    for &k in c.parts() {
        running += u64::from(k);
        acc *= binomial(running, u64::from(k));
    }
    acc
}

/// Power sum `p_m(mu) = sum_k mu_k^m`; `p_0 = n`.
pub fn power_sum(mu: &[Rational], m: u32) -> Rational {
    mu.iter().map(|x| x.pow(m)).sum()
}

/// Complete homogeneous symmetric polynomial `h_m(mu)`, the sum of every
/// degree-`m` monomial, enumerated over `W_{n,m}`. Uses the default cap.
pub fn complete_homogeneous(mu: &[Rational], m: u32) -> Result<Rational, SymfuncError> {
    complete_homogeneous_capped(mu, m, DegreeCap::default())
}

pub fn complete_homogeneous_capped(
    mu: &[Rational],
    m: u32,
    cap: DegreeCap,
) -> Result<Rational, SymfuncError> {
    if mu.is_empty() {
        return Err(SymfuncError::EmptyInput);
    }
    cap.check(m)?;
    let weights: Vec<Vec<Rational>> = mu.iter().map(|x| powers(x, m)).collect();
    Ok(composition_product_sum(&weights, m))
}

/// `[1, x, x^2, ..., x^m]`.
pub(crate) fn powers(x: &Rational, m: u32) -> Vec<Rational> {
    let mut out = Vec::with_capacity(m as usize + 1);
    let mut acc = Rational::one();
    for _ in 0..=m {
        out.push(acc.clone());
        acc *= x;
    }
    out
}

/// `sum over (k_1..k_n) in W_{n,m} of prod_j weights[j][k_j]`.
///
/// Each slot's weights are brought to a common denominator first so the
/// enumeration itself runs on integers; the single division happens at the
/// end. Zero weights prune whole subtrees.
pub(crate) fn composition_product_sum(weights: &[Vec<Rational>], m: u32) -> Rational {
    let m = m as usize;
    let mut denominators = Vec::with_capacity(weights.len());
    let mut numerators: Vec<Vec<BigInt>> = Vec::with_capacity(weights.len());
    for slot in weights {
        assert!(slot.len() > m, "weight table shorter than the degree");
        let d = slot[..=m]
            .iter()
            .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
        numerators.push(
            slot[..=m]
                .iter()
                .map(|w| w.numer() * (&d / w.denom()))
                .collect(),
        );
        denominators.push(d);
    }

    fn walk(slots: &[Vec<BigInt>], remaining: usize, prefix: &BigInt, total: &mut BigInt) {
        let (first, rest) = slots.split_first().expect("at least one slot");
        if rest.is_empty() {
            let w = &first[remaining];
            if !w.is_zero() {
                *total += prefix * w;
            }
            return;
        }
        for (k, w) in first[..=remaining].iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            walk(rest, remaining - k, &(prefix * w), total);
        }
    }

    let mut total = BigInt::zero();
    walk(&numerators, m, &BigInt::one(), &mut total);
    let denom = denominators.iter().product::<BigInt>();
    Rational::new(total, denom)
}
