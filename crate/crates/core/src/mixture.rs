//! Mixture coefficients `theta_k` for the exponential and Laplace families and
//! the admissibility condition `h_m(mu) != p_m(mu)` for every `m >= 2`.

use std::fmt;
use std::str::FromStr;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::symfunc::{
    complete_homogeneous, power_sum, DegreeCap, Rational, SymfuncError, DEFAULT_DEGREE_CAP,
};

/// Default upper degree for the condition scan.
pub const DEFAULT_CONDITION_M_MAX: u32 = DEFAULT_DEGREE_CAP;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MixtureError {
    #[error("need at least 2 coefficients, got {0}")]
    TooFewEntries(usize),
    #[error("mu[{0}] is zero")]
    ZeroMu(usize),
    #[error("DuplicateMu: mu[{first}] and mu[{second}] coincide")]
    DuplicateMu { first: usize, second: usize },
    #[error("NonPositiveMu: mu[{0}] must be strictly positive for the Laplace family")]
    NonPositiveMu(usize),
    #[error("FamilyMismatch: expected {expected} coefficients, got {found}")]
    FamilyMismatch { expected: Family, found: Family },
    #[error("theta was not derived from this mu vector")]
    ThetaMismatch,
    #[error("OddDegree: the Laplace identity is stated for even degrees, got m = {m} (sum theta_k mu_k^m = {weighted_sum})")]
    OddDegree { m: u32, weighted_sum: Rational },
    #[error("condition scan needs m_max >= 2, got {0}")]
    ScanTooShort(u32),
    #[error(transparent)]
    Symfunc(#[from] SymfuncError),
}

/// Which characterization a coefficient vector is meant for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    #[serde(rename = "exp")]
    Exponential,
    #[serde(rename = "laplace")]
    Laplace,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Exponential => "exp",
            Family::Laplace => "laplace",
        })
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exp" | "exponential" => Ok(Family::Exponential),
            "laplace" => Ok(Family::Laplace),
            other => Err(format!("unknown family `{other}` (expected exp or laplace)")),
        }
    }
}

/// Validated coefficients `mu_1..mu_n`: at least two, pairwise distinct,
/// nonzero, and strictly positive for the Laplace family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MuVector {
    entries: Vec<Rational>,
    family: Family,
}

impl MuVector {
    pub fn new(entries: Vec<Rational>, family: Family) -> Result<Self, MixtureError> {
        if entries.len() < 2 {
            return Err(MixtureError::TooFewEntries(entries.len()));
        }
        for (i, x) in entries.iter().enumerate() {
            if x.is_zero() {
                return Err(MixtureError::ZeroMu(i));
            }
            if let Some(j) = entries[..i].iter().position(|y| y == x) {
                return Err(MixtureError::DuplicateMu { first: j, second: i });
            }
        }
        if family == Family::Laplace {
            if let Some(i) = entries.iter().position(|x| !x.is_positive()) {
                return Err(MixtureError::NonPositiveMu(i));
            }
        }
        Ok(MuVector { entries, family })
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn all_positive(&self) -> bool {
        self.entries.iter().all(Rational::is_positive)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(Rational::to_f64).collect()
    }

    /// Coefficients of this vector's own family.
    pub fn theta(&self) -> Result<ThetaSet, MixtureError> {
        match self.family {
            Family::Exponential => theta_exponential(self),
            Family::Laplace => theta_laplace(self),
        }
    }
}

/// Mixture weights in positional correspondence with `source_mu`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThetaSet {
    coefficients: Vec<Rational>,
    family: Family,
    source_mu: MuVector,
}

impl ThetaSet {
    pub fn coefficients(&self) -> &[Rational] {
        &self.coefficients
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn source_mu(&self) -> &MuVector {
        &self.source_mu
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coefficients.iter().map(Rational::to_f64).collect()
    }

    /// `sum_k theta_k mu_k^m`, exact.
    pub fn weighted_power_sum(&self, m: u32) -> Rational {
        self.coefficients
            .iter()
            .zip(self.source_mu.entries())
            .map(|(t, x)| t * x.pow(m))
            .sum()
    }

    fn check_source(&self, mu: &MuVector) -> Result<(), MixtureError> {
        if self.source_mu.entries() != mu.entries() {
            return Err(MixtureError::ThetaMismatch);
        }
        Ok(())
    }
}

fn partial_fraction_weights(
    values: &[Rational],
) -> Result<Vec<Rational>, MixtureError> {
    let mut out = Vec::with_capacity(values.len());
    for (k, vk) in values.iter().enumerate() {
        let mut acc = Rational::one();
        for (j, vj) in values.iter().enumerate() {
            if j == k {
                continue;
            }
            let gap = vk - vj;
            if gap.is_zero() {
                return Err(MixtureError::DuplicateMu {
                    first: j.min(k),
                    second: j.max(k),
                });
            }
            acc *= &(vk / gap);
        }
        out.push(acc);
    }
    Ok(out)
}

/// `theta_k = prod_{j != k} mu_k / (mu_k - mu_j)`.
pub fn theta_exponential(mu: &MuVector) -> Result<ThetaSet, MixtureError> {
    Ok(ThetaSet {
        coefficients: partial_fraction_weights(mu.entries())?,
        family: Family::Exponential,
        source_mu: mu.clone(),
    })
}

/// `theta_k = prod_{j != k} mu_k^2 / (mu_k^2 - mu_j^2)`; every `mu_k` must be positive.
pub fn theta_laplace(mu: &MuVector) -> Result<ThetaSet, MixtureError> {
    if let Some(i) = mu.entries().iter().position(|x| !x.is_positive()) {
        return Err(MixtureError::NonPositiveMu(i));
    }
    let squares: Vec<Rational> = mu.entries().iter().map(|x| x.pow(2)).collect();
    Ok(ThetaSet {
        coefficients: partial_fraction_weights(&squares)?,
        family: Family::Laplace,
        source_mu: mu.clone(),
    })
}

/// Outcome of scanning `h_m(mu) != p_m(mu)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// No equality for `2 <= m <= m_max`; says nothing beyond.
    PassUpTo(u32),
    /// Equality at this `m` and at no smaller `m >= 2`.
    FailAt(u32),
    /// Holds for every `m >= 2` (all-positive coefficients).
    PassProvenAllM,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionReport {
    pub checked_up_to: u32,
    pub verdict: Verdict,
    /// `(h_m, p_m)` at the failing degree.
    pub witness: Option<(Rational, Rational)>,
}

impl Serialize for ConditionReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let (name, m) = match self.verdict {
            Verdict::PassUpTo(m) => ("PassUpTo", Some(m)),
            Verdict::FailAt(m) => ("FailAt", Some(m)),
            Verdict::PassProvenAllM => ("PassProvenAllM", None),
        };
        let mut map = serializer.serialize_map(Some(4))?;
        map.serialize_entry("verdict", name)?;
        map.serialize_entry("m", &m)?;
        map.serialize_entry("h_m", &self.witness.as_ref().map(|w| &w.0))?;
        map.serialize_entry("p_m", &self.witness.as_ref().map(|w| &w.1))?;
        map.end()
    }
}

/// Checks `h_m(mu) != p_m(mu)` for `m = 2..=m_max`.
///
/// All-positive vectors pass for every `m` without scanning, since `h_m`
/// contains every `mu_k^m` plus further positive monomials. For `n = 2`,
/// equality happens exactly when `mu_2 = -mu_1` and `m` is odd, so such
/// pairs fail at `m = 3` regardless of `m_max`. Everything else is scanned
/// exactly.
pub fn check_condition(mu: &MuVector, m_max: u32) -> Result<ConditionReport, MixtureError> {
    if m_max < 2 {
        return Err(MixtureError::ScanTooShort(m_max));
    }
    DegreeCap::default().check(m_max)?;
    let entries = mu.entries();

    if mu.all_positive() {
        return Ok(ConditionReport {
            checked_up_to: m_max,
            verdict: Verdict::PassProvenAllM,
            witness: None,
        });
    }

    if entries.len() == 2 && entries[1] == -&entries[0] {
        let h = complete_homogeneous(entries, 3)?;
        let p = power_sum(entries, 3);
        debug_assert_eq!(h, p);
        return Ok(ConditionReport {
            checked_up_to: m_max,
            verdict: Verdict::FailAt(3),
            witness: Some((h, p)),
        });
    }

    for m in 2..=m_max {
        let h = complete_homogeneous(entries, m)?;
        let p = power_sum(entries, m);
        if h == p {
            return Ok(ConditionReport {
                checked_up_to: m,
                verdict: Verdict::FailAt(m),
                witness: Some((h, p)),
            });
        }
    }
    Ok(ConditionReport {
        checked_up_to: m_max,
        verdict: Verdict::PassUpTo(m_max),
        witness: None,
    })
}

/// Both sides of a mixture moment identity at one degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub m: u32,
    pub holds: bool,
    pub lhs: Rational,
    pub rhs: Rational,
}

/// Checks `sum_k theta_k mu_k^m == h_m(mu)` for exponential-family weights.
pub fn verify_lemma1(
    mu: &MuVector,
    theta: &ThetaSet,
    m: u32,
) -> Result<IdentityCheck, MixtureError> {
    if theta.family() != Family::Exponential {
        return Err(MixtureError::FamilyMismatch {
            expected: Family::Exponential,
            found: theta.family(),
        });
    }
    theta.check_source(mu)?;
    let lhs = theta.weighted_power_sum(m);
    let rhs = complete_homogeneous(mu.entries(), m)?;
    Ok(IdentityCheck {
        m,
        holds: lhs == rhs,
        lhs,
        rhs,
    })
}

/// Checks `sum_k theta_k mu_k^m == h_{m/2}(mu_1^2, ..., mu_n^2)` for Laplace
/// weights and even `m`.
pub fn verify_lemma1_laplace(
    mu: &MuVector,
    theta: &ThetaSet,
    m: u32,
) -> Result<IdentityCheck, MixtureError> {
    if theta.family() != Family::Laplace {
        return Err(MixtureError::FamilyMismatch {
            expected: Family::Laplace,
            found: theta.family(),
        });
    }
    theta.check_source(mu)?;
    let lhs = theta.weighted_power_sum(m);
    if m % 2 == 1 {
        return Err(MixtureError::OddDegree { m, weighted_sum: lhs });
    }
    let squares: Vec<Rational> = mu.entries().iter().map(|x| x.pow(2)).collect();
    let rhs = complete_homogeneous(&squares, m / 2)?;
    Ok(IdentityCheck {
        m,
        holds: lhs == rhs,
        lhs,
        rhs,
    })
}
