//! Exact anti-concentration computations for Rademacher sums
//! `X = a_1 ξ_1 + ... + a_n ξ_n` against geometric target sets.
//!
//! All probabilities are exact dyadic rationals and every inequality is
//! decided without floating point.

pub mod convexcover;
pub mod distributions;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod numerics;
pub mod sensitivity;
pub mod sumstruct;
pub mod targets;

pub use distributions::{
    full_distribution, hit_probability, partition_anti_concentrated, rho, support_distribution,
    Budget, CoefficientSystem, IndexPartition, SupportDistribution,
};
pub use error::{Error, Result};
pub use numerics::{DyadicProbability, Point, Rational};
pub use targets::TargetSet;
