//! Subset autoregressive time-series modelling parameterized by partial
//! autocorrelations.
//!
//! A subset AR model constrains the partial autocorrelations of an AR(p)
//! process to zero except at a chosen set of lags. In that parameterization
//! the admissible region is simply the open unit cube, which makes exact
//! maximum-likelihood estimation, model search and inference tractable even
//! for high-order models on long series.
//!
//! The crate provides:
//!
//! - [`pacf`]: the order-recursive transform between partial
//!   autocorrelations and AR coefficients, with Burg / Yule-Walker
//!   estimation and identification-plot data;
//! - [`likelihood`]: exact Gaussian likelihood through a precomputed
//!   sum-of-squares kernel (O(p^2) per evaluation) and its maximization;
//! - [`inference`]: closed-form Fisher information, the expansion Jacobian
//!   as a product of stage factors, and standard errors;
//! - [`selection`]: the polynomial-time subset search over an
//!   information-criterion approximation built from the Burg partial
//!   autocorrelations, plus exact re-ranking of the retained models;
//! - [`diagnostics`]: residual autocorrelations with their large-sample
//!   covariance, portmanteau tests and simultaneous bands;
//! - [`forecast`]: process simulation, point forecasts with standard
//!   errors, holdout evaluation and a power-transform skewness scan.

pub mod arphi;
pub mod diagnostics;
pub mod error;
pub mod forecast;
pub mod inference;
pub mod likelihood;
pub mod optim;
pub mod pacf;
pub mod selection;
pub mod stats;
pub mod types;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use types::{FittedModel, PhiVector, SubsetSpec, TimeSeries, ZetaVector};
