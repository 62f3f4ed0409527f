//! Exact and numerical machinery for the exponential and Laplace mixture
//! characterizations: `prod_k phi(mu_k t) = sum_k theta_k phi(mu_k t)`.
//!
//! * [`symfunc`] exact rationals, weak compositions, `h_m` and `p_m`.
//! * [`mixture`] the `theta` coefficient families and the `h_m != p_m` condition.
//! * [`cf`] closed-form characteristic functions and grid residuals.
//! * [`moments`] the moment recursion obtained by differentiating the identity at zero.
//! * [`dist`] densities, CDFs, sampling, order statistics and KS distances.

pub mod cf;
pub mod dist;
pub mod mixture;
pub mod moments;
pub mod symfunc;

pub use cf::{CfModel, GridSpec, Residual};
pub use dist::{MixtureLaw, RenyiReport};
pub use mixture::{ConditionReport, Family, MuVector, ThetaSet, Verdict};
pub use moments::{MomentSeq, RecursionStep, StepOutcome};
pub use symfunc::{Composition, Rational};
