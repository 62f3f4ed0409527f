//! Moment recursion obtained by differentiating
//! `prod_k phi(mu_k t) = sum_k theta_k phi(mu_k t)` `m` times at zero.
//!
//! Moments live in the real domain, `M_m = phi^(m)(0) / i^m = E(X^m)`, so the
//! powers of `i` cancel on both sides and every step is exact rational
//! arithmetic. The product side expands over weak compositions:
//!
//! ```text
//! E(S^m) = sum_{c in W_{n,m}} m!/(c_1!...c_n!) prod_j mu_j^{c_j} M_{c_j}
//! ```
//!
//! The `n` compositions with a part equal to `m` contribute `p_m(mu) M_m`;
//! moving them across gives `D_m M_m = R_m` with
//! `D_m = sum_k theta_k mu_k^m - p_m(mu)` and `R_m` the sum over the
//! remaining compositions, which only involves lower moments.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::mixture::{Family, MixtureError, MuVector, ThetaSet};
use crate::symfunc::{composition_product_sum, power_sum, DegreeCap, Rational, SymfuncError};

/// Default recursion depth.
pub const DEFAULT_RECURSION_M_MAX: u32 = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MomentError {
    #[error("InsufficientMoments: degree {needed} requested but only M_0..M_{available} known")]
    InsufficientMoments { needed: u32, available: u32 },
    #[error("InsufficientSeeds: the degree-1 seed (E X) is required")]
    InsufficientSeeds,
    #[error("MissingSeed({0}): singular step with zero right-hand side needs a seeded value")]
    MissingSeed(u32),
    #[error("Inconsistent({m}): D = 0 but R = {rhs}; no law satisfies the identity with these inputs")]
    Inconsistent { m: u32, rhs: Rational },
    #[error("recursion needs m_max >= 2, got {0}")]
    DepthTooSmall(u32),
    #[error("rate must be strictly positive, got {0}")]
    NonPositiveRate(Rational),
    #[error("not a moment sequence: {0}")]
    InvalidSequence(String),
    #[error("theta was not derived from this mu vector")]
    ThetaMismatch,
    #[error(transparent)]
    Symfunc(#[from] SymfuncError),
    #[error(transparent)]
    Mixture(#[from] MixtureError),
}

/// Raw moments `M_0..M_mmax` with `M_0 = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MomentSeq {
    values: Vec<Rational>,
    family: Option<Family>,
}

impl MomentSeq {
    /// Rejects `M_0 != 1`, and for exponential-family context also
    /// `M_2 < M_1^2`.
    pub fn new(values: Vec<Rational>, family: Option<Family>) -> Result<Self, MomentError> {
        match values.first() {
            Some(m0) if *m0 == Rational::one() => {}
            _ => return Err(MomentError::InvalidSequence("M_0 must equal 1".into())),
        }
        let seq = MomentSeq { values, family };
        if family == Some(Family::Exponential) && !seq.variance_nonnegative() {
            return Err(MomentError::InvalidSequence("M_2 < M_1^2".into()));
        }
        Ok(seq)
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn family(&self) -> Option<Family> {
        self.family
    }

    pub fn max_degree(&self) -> u32 {
        (self.values.len() - 1) as u32
    }

    pub fn get(&self, m: u32) -> Option<&Rational> {
        self.values.get(m as usize)
    }

    /// `M_2 M_0 >= M_1^2`; vacuous when `M_2` is unknown.
    pub fn variance_nonnegative(&self) -> bool {
        match (self.values.get(1), self.values.get(2)) {
            (Some(m1), Some(m2)) => m2 * &self.values[0] >= m1.pow(2),
            _ => true,
        }
    }
}

/// What the recursion could do at one degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Solved(Rational),
    /// `D = 0` and `R = 0`; `M_m` was taken from the seed map.
    SingularConsistent(Rational),
    /// `D = 0` and `R != 0`.
    SingularInconsistent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecursionStep {
    pub m: u32,
    pub denominator: Rational,
    pub rhs: Rational,
    pub outcome: StepOutcome,
}

impl Serialize for RecursionStep {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let outcome = match self.outcome {
            StepOutcome::Solved(_) => "Solved",
            StepOutcome::SingularConsistent(_) => "SingularConsistent",
            StepOutcome::SingularInconsistent => "SingularInconsistent",
        };
        let mut map = serializer.serialize_map(Some(4))?;
        map.serialize_entry("m", &self.m)?;
        map.serialize_entry("D", &self.denominator)?;
        map.serialize_entry("R", &self.rhs)?;
        map.serialize_entry("outcome", outcome)?;
        map.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reconstruction {
    pub moments: MomentSeq,
    pub steps: Vec<RecursionStep>,
}

/// Per-slot weights `mu_j^k M_k / k!` for `k = 0..=m`, with the `k = m`
/// entry zeroed when `exclude_top` is set.
fn scaled_weights(mu: &[Rational], moments: &[Rational], m: u32, exclude_top: bool) -> Vec<Vec<Rational>> {
    mu.iter()
        .map(|x| {
            let mut pow = Rational::one();
            let mut fact = BigInt::from(1);
            (0..=m)
                .map(|k| {
                    if k > 0 {
                        pow *= x;
                        fact *= k;
                    }
                    if exclude_top && k == m {
                        Rational::zero()
                    } else {
                        &pow * &moments[k as usize] / Rational::from_integer(fact.clone())
                    }
                })
                .collect()
        })
        .collect()
}

fn factorial(m: u32) -> Rational {
    Rational::from_integer((1..=m).fold(BigInt::from(1), |acc, k| acc * k))
}

/// Sum over `W_{n,m}` of `multinomial * prod_j mu_j^{k_j} M_{k_j}`, written as
/// `m! * sum prod_j (mu_j^{k_j} M_{k_j} / k_j!)`.
fn multinomial_moment_sum(mu: &[Rational], moments: &[Rational], m: u32, exclude_top: bool) -> Rational {
    let weights = scaled_weights(mu, moments, m, exclude_top);
    factorial(m) * composition_product_sum(&weights, m)
}

/// `E(S^m)` for `S = mu_1 X_1 + ... + mu_n X_n` with `X_j` i.i.d. having the
/// given moments.
pub fn moment_of_sum(mu: &MuVector, moments: &MomentSeq, m: u32) -> Result<Rational, MomentError> {
    if m > moments.max_degree() {
        return Err(MomentError::InsufficientMoments {
            needed: m,
            available: moments.max_degree(),
        });
    }
    DegreeCap::default().check(m)?;
    Ok(multinomial_moment_sum(mu.entries(), moments.values(), m, false))
}

/// Exact moments `M_0..M_mmax` of `Exp(lambda)` (`m!/lambda^m`) or of the
/// Laplace law with rate `lambda` (same for even `m`, zero for odd).
pub fn forward_moments(family: Family, lambda: &Rational, m_max: u32) -> Result<MomentSeq, MomentError> {
    if !lambda.is_positive() {
        return Err(MomentError::NonPositiveRate(lambda.clone()));
    }
    let scale = lambda.recip();
    let mut values = Vec::with_capacity(m_max as usize + 1);
    let mut acc = Rational::one();
    for m in 0..=m_max {
        if m > 0 {
            acc = acc * Rational::from(m) * &scale;
        }
        let v = match family {
            Family::Laplace if m % 2 == 1 => Rational::zero(),
            _ => acc.clone(),
        };
        values.push(v);
    }
    MomentSeq::new(values, Some(family))
}

/// Runs the recursion `D_m M_m = R_m` for `m = 2..=m_max`, starting from
/// `M_0 = 1` and the seeded `M_1`.
///
/// At a singular step (`D_m = 0`) the value comes from `seeds[m]` when
/// `R_m = 0`; when `R_m != 0` the inputs are contradictory. Seeds for
/// non-singular degrees are ignored.
pub fn reconstruct_moments(
    mu: &MuVector,
    theta: &ThetaSet,
    seeds: &BTreeMap<u32, Rational>,
    m_max: u32,
) -> Result<Reconstruction, MomentError> {
    if m_max < 2 {
        return Err(MomentError::DepthTooSmall(m_max));
    }
    DegreeCap::default().check(m_max)?;
    if theta.source_mu().entries() != mu.entries() {
        return Err(MomentError::ThetaMismatch);
    }
    let m1 = seeds.get(&1).ok_or(MomentError::InsufficientSeeds)?;
    let entries = mu.entries();

    let mut values = vec![Rational::one(), m1.clone()];
    let mut steps = Vec::with_capacity(m_max as usize - 1);
    for m in 2..=m_max {
        let denominator = theta.weighted_power_sum(m) - power_sum(entries, m);
        // The slot M_m is excluded from R_m, so any placeholder works.
        values.push(Rational::zero());
        let rhs = multinomial_moment_sum(entries, &values, m, true);
        let (outcome, value) = if !denominator.is_zero() {
            let v = &rhs / &denominator;
            (StepOutcome::Solved(v.clone()), v)
        } else if rhs.is_zero() {
            let v = seeds.get(&m).cloned().ok_or(MomentError::MissingSeed(m))?;
            (StepOutcome::SingularConsistent(v.clone()), v)
        } else {
            return Err(MomentError::Inconsistent { m, rhs });
        };
        values[m as usize] = value;
        steps.push(RecursionStep { m, denominator, rhs, outcome });
    }
    Ok(Reconstruction {
        moments: MomentSeq::new(values, Some(theta.family()))?,
        steps,
    })
}

/// Law identified by `E(X)` once the recursion has pinned every moment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "lambda")]
pub enum SeedVerdict {
    Degenerate,
    ExponentialWith(Rational),
    NegExponentialWith(Rational),
}

pub fn classify_from_seed(m1: &Rational) -> SeedVerdict {
    if m1.is_zero() {
        SeedVerdict::Degenerate
    } else if m1.is_positive() {
        SeedVerdict::ExponentialWith(m1.recip())
    } else {
        SeedVerdict::NegExponentialWith(-m1.recip())
    }
}
