//! Multivariate models of random variables `X1..Xn` that are conditionally
//! independent given a latent variable `Z`.
//!
//! A model is assembled from one bivariate copula `C(u, w)` per component
//! (coupling `Xi` with `Z`) plus univariate marginals. Everything is computed
//! in copula space: the joint copula of `X1..Xn` is the integral over `w` of
//! the product of h-functions `dC(u_i, w)/dw`, and order-statistic
//! distributions come from a Poisson-binomial recurrence over the
//! conditional probabilities at each quadrature node.
//!
//! The numeric code is generic over [`Scalar`] (`f32` or `f64`); the
//! `*F64` aliases below are what most callers want.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod copulas;
pub mod error;
pub mod marginals;
pub mod model;
pub mod montecarlo;
pub mod numerics;
pub mod orderstats;
pub mod permanent;
pub mod scalar;

pub use copulas::{BivariateCopula, CopulaValidation};
pub use error::{Error, Result};
pub use marginals::Marginal;
pub use model::{CandidateCopula, CiModel, CiReport, Component};
pub use montecarlo::{KsReport, SampleBatch};
pub use numerics::{Integrator, QuadratureRule, RootBracket};
pub use orderstats::{CountDistribution, OrderStatQuery};
pub use permanent::SquareMatrix;
pub use scalar::Scalar;

pub type BivariateCopulaF64 = BivariateCopula<f64>;
pub type MarginalF64 = Marginal<f64>;
pub type ComponentF64 = Component<f64>;
pub type CiModelF64 = CiModel<f64>;
pub type QuadratureRuleF64 = QuadratureRule<f64>;
pub type SquareMatrixF64 = SquareMatrix<f64>;
pub type SampleBatchF64 = SampleBatch<f64>;
pub type CountDistributionF64 = CountDistribution<f64>;

pub type BivariateCopulaF32 = BivariateCopula<f32>;
pub type MarginalF32 = Marginal<f32>;
pub type CiModelF32 = CiModel<f32>;
pub type QuadratureRuleF32 = QuadratureRule<f32>;
