//! Closed-form characteristic functions and the sup-norm residuals of
//! `prod_k phi(mu_k t) = sum_k theta_k phi(mu_k t)` and of
//! `phi(t) phi(-t) = (phi(t) + phi(-t)) / 2` on uniform grids.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::mixture::{MuVector, ThetaSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CfError {
    #[error("model parameter must be strictly positive and finite, got {0}")]
    NonPositiveParameter(f64),
    #[error("invalid model `{0}` (expected exp:RATE, negexp:RATE, laplace:RATE, bernoulli:ATOM or degenerate)")]
    InvalidModel(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("theta was not derived from this mu vector")]
    ThetaMismatch,
}

/// Candidate law for `X`, evaluable as `phi(t) = E exp(itX)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CfModel {
    /// Point mass at zero.
    Degenerate,
    Exp { rate: f64 },
    /// `-X` with `X ~ Exp(rate)`.
    NegExp { rate: f64 },
    Laplace { rate: f64 },
    /// `P(X = 0) = P(X = atom) = 1/2`.
    HalfBernoulli { atom: f64 },
}

fn positive(x: f64) -> Result<f64, CfError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(CfError::NonPositiveParameter(x))
    }
}

impl CfModel {
    pub fn exp(rate: f64) -> Result<Self, CfError> {
        Ok(CfModel::Exp { rate: positive(rate)? })
    }

    pub fn neg_exp(rate: f64) -> Result<Self, CfError> {
        Ok(CfModel::NegExp { rate: positive(rate)? })
    }

    pub fn laplace(rate: f64) -> Result<Self, CfError> {
        Ok(CfModel::Laplace { rate: positive(rate)? })
    }

    pub fn half_bernoulli(atom: f64) -> Result<Self, CfError> {
        Ok(CfModel::HalfBernoulli { atom: positive(atom)? })
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        cf_eval(self, t)
    }
}

impl fmt::Display for CfModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CfModel::Degenerate => f.write_str("degenerate"),
            CfModel::Exp { rate } => write!(f, "exp:{rate}"),
            CfModel::NegExp { rate } => write!(f, "negexp:{rate}"),
            CfModel::Laplace { rate } => write!(f, "laplace:{rate}"),
            CfModel::HalfBernoulli { atom } => write!(f, "bernoulli:{atom}"),
        }
    }
}

impl FromStr for CfModel {
    type Err = CfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let invalid = || CfError::InvalidModel(s.to_string());
        if s == "degenerate" {
            return Ok(CfModel::Degenerate);
        }
        let (kind, param) = s.split_once(':').ok_or_else(invalid)?;
        let value: f64 = param.trim().parse().map_err(|_| invalid())?;
        match kind {
            "exp" => CfModel::exp(value),
            "negexp" => CfModel::neg_exp(value),
            "laplace" => CfModel::laplace(value),
            "bernoulli" => CfModel::half_bernoulli(value),
            _ => Err(invalid()),
        }
    }
}

impl Serialize for CfModel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// `phi(t)` for the given model.
pub fn cf_eval(model: &CfModel, t: f64) -> Complex64 {
    match *model {
        CfModel::Degenerate => Complex64::new(1.0, 0.0),
        CfModel::Exp { rate } => Complex64::new(rate, 0.0) / Complex64::new(rate, -t),
        CfModel::NegExp { rate } => Complex64::new(rate, 0.0) / Complex64::new(rate, t),
        CfModel::Laplace { rate } => {
            let r2 = rate * rate;
            Complex64::new(r2 / (r2 + t * t), 0.0)
        }
        CfModel::HalfBernoulli { atom } => {
            let (s, c) = (atom * t).sin_cos();
            Complex64::new(0.5 * (1.0 + c), 0.5 * s)
        }
    }
}

/// Uniform grid including both endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { t_min: -10.0, t_max: 10.0, points: 2001 }
    }
}

impl GridSpec {
    pub fn new(t_min: f64, t_max: f64, points: usize) -> Result<Self, CfError> {
        if !(t_min.is_finite() && t_max.is_finite()) || t_min >= t_max {
            return Err(CfError::InvalidGrid(format!(
                "need finite t_min < t_max, got {t_min}..{t_max}"
            )));
        }
        if points < 2 {
            return Err(CfError::InvalidGrid(format!("need at least 2 points, got {points}")));
        }
        Ok(GridSpec { t_min, t_max, points })
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            return self.t_max;
        }
        self.t_min + (self.t_max - self.t_min) * (i as f64) / ((self.points - 1) as f64)
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(|i| self.point(i))
    }
}

impl FromStr for GridSpec {
    type Err = CfError;

    /// `tmin:tmax:points`
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CfError::InvalidGrid(format!("`{s}` is not tmin:tmax:points"));
        let mut it = s.split(':');
        let (a, b, c) = match (it.next(), it.next(), it.next(), it.next()) {
            (Some(a), Some(b), Some(c), None) => (a, b, c),
            _ => return Err(bad()),
        };
        let t_min = a.trim().parse().map_err(|_| bad())?;
        let t_max = b.trim().parse().map_err(|_| bad())?;
        let points = c.trim().parse().map_err(|_| bad())?;
        GridSpec::new(t_min, t_max, points)
    }
}

/// Largest absolute deviation over a grid and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub residual: f64,
    pub argmax_t: f64,
    pub grid: GridSpec,
}

/// Max of `f` over the grid. Ties go to the smallest grid index, so the
/// answer does not depend on how rayon splits the range.
fn grid_max<F>(grid: &GridSpec, f: F) -> Residual
where
    F: Fn(f64) -> f64 + Sync,
{
    let (idx, residual) = (0..grid.points)
        .into_par_iter()
        .map(|i| (i, f(grid.point(i))))
        .reduce(
            || (usize::MAX, f64::NEG_INFINITY),
            |a, b| {
                if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                    b
                } else {
                    a
                }
            },
        );
    Residual { residual, argmax_t: grid.point(idx), grid: *grid }
}

/// `max_t |prod_k phi(mu_k t) - sum_k theta_k phi(mu_k t)|`.
///
/// The mixture side is summed in ascending order of `|theta_k|`.
pub fn identity_residual(
    model: &CfModel,
    mu: &MuVector,
    theta: &ThetaSet,
    grid: &GridSpec,
) -> Result<Residual, CfError> {
    if theta.source_mu().entries() != mu.entries() {
        return Err(CfError::ThetaMismatch);
    }
    let mus = mu.to_f64();
    let thetas = theta.to_f64();
    let mut order: Vec<usize> = (0..mus.len()).collect();
    order.sort_by(|&a, &b| thetas[a].abs().total_cmp(&thetas[b].abs()));

    Ok(grid_max(grid, |t| {
        let product: Complex64 = mus.iter().map(|&m| cf_eval(model, m * t)).product();
        let mixture = order.iter().fold(Complex64::new(0.0, 0.0), |acc, &k| {
            acc + thetas[k] * cf_eval(model, mus[k] * t)
        });
        (product - mixture).norm()
    }))
}

/// `max_t |phi(t) phi(-t) - (phi(t) + phi(-t)) / 2|`.
pub fn phisa_residual(model: &CfModel, grid: &GridSpec) -> Residual {
    grid_max(grid, |t| {
        let a = cf_eval(model, t);
        let b = cf_eval(model, -t);
        (a * b - 0.5 * (a + b)).norm()
    })
}
