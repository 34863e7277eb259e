//! Domain types shared by all modules.
//!
//! All types here are immutable values after construction and may be shared
//! freely across threads.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Half-open interior tolerance for partial autocorrelations: values with
/// `|zeta| >= 1 - INTERIOR_TOL` are rejected because the covariance
/// determinant and the likelihood are singular at the cube boundary.
pub const INTERIOR_TOL: f64 = 1e-10;

/// An observed, equispaced, univariate time series.
///
/// The series is stored together with the sample mean used for centering so
/// that forecasts can be mapped back to original units.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    mean: f64,
    centered: bool,
}

impl TimeSeries {
    /// Wraps raw observations. Requires at least two finite values.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooShort {
                need: 2,
                got: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(pos + 1));
        }
        Ok(TimeSeries {
            values,
            mean: 0.0,
            centered: false,
        })
    }

    /// Subtracts the sample mean and records it.
    ///
    /// The sample mean is asymptotically efficient for the process mean, so
    /// all likelihood work in this crate operates on centered series.
    pub fn center(values: &[f64]) -> Result<Self> {
        let raw = TimeSeries::new(values.to_vec())?;
        Ok(raw.centered())
    }

    /// Returns a centered copy of this series (no-op if already centered).
    pub fn centered(&self) -> Self {
        if self.centered {
            return self.clone();
        }
        let n = self.values.len() as f64;
        let mean = self.values.iter().sum::<f64>() / n;
        let values: Vec<f64> = self.values.iter().map(|v| v - mean).collect();
        TimeSeries {
            values,
            mean,
            centered: true,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sample mean subtracted during centering (0 for raw series).
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// Sample variance with divisor `n` (the `c0` of the selection criterion).
    pub fn sample_variance(&self) -> f64 {
        let n = self.values.len() as f64;
        let mean = if self.centered {
            0.0
        } else {
            self.values.iter().sum::<f64>() / n
        };
        self.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
    }
}

/// An ordered set of active lags `i1 < i2 < ... < im` defining a subset AR
/// model of order `p = im` with `m` free parameters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsetSpec {
    lags: Vec<usize>,
}

impl SubsetSpec {
    /// Canonicalizes a lag set: sorts, deduplicates, rejects non-positive
    /// lags and the empty set.
    pub fn new(lags: &[i64]) -> Result<Self> {
        if lags.is_empty() {
            return Err(Error::EmptyLags);
        }
        if let Some(&bad) = lags.iter().find(|&&l| l <= 0) {
            return Err(Error::NonPositiveLag(bad));
        }
        let mut lags: Vec<usize> = lags.iter().map(|&l| l as usize).collect();
        lags.sort_unstable();
        lags.dedup();
        Ok(SubsetSpec { lags })
    }

    /// Like [`SubsetSpec::new`] but from already-unsigned lags.
    pub fn from_lags(lags: &[usize]) -> Result<Self> {
        let as_i64: Vec<i64> = lags.iter().map(|&l| l as i64).collect();
        SubsetSpec::new(&as_i64)
    }

    /// The full AR model of order `p`: lags `1..=p`.
    pub fn full(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::EmptyLags);
        }
        Ok(SubsetSpec {
            lags: (1..=p).collect(),
        })
    }

    pub fn lags(&self) -> &[usize] {
        &self.lags
    }

    /// Model order `p = im` (largest lag).
    pub fn order(&self) -> usize {
        *self.lags.last().expect("lags nonempty")
    }

    /// Number of free parameters `m`.
    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// True when the lag set is `1..=p` (no constrained lags).
    pub fn is_full(&self) -> bool {
        self.lags.len() == self.order()
    }
}

impl std::fmt::Display for SubsetSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, lag) in self.lags.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{lag}")?;
        }
        write!(f, ")")
    }
}

/// Partial-autocorrelation parameters of a subset AR model, one value per
/// active lag, each interior to the open cube `(-1, 1)^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaVector {
    spec: SubsetSpec,
    values: Vec<f64>,
}

impl ZetaVector {
    pub fn new(spec: SubsetSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidConfig(format!(
                "{} parameter values supplied for {} lags",
                values.len(),
                spec.len()
            )));
        }
        for (&lag, &v) in spec.lags().iter().zip(&values) {
            if !v.is_finite() || v.abs() >= 1.0 - INTERIOR_TOL {
                return Err(Error::BoundaryParameter { lag, value: v });
            }
        }
        Ok(ZetaVector { spec, values })
    }

    pub fn spec(&self) -> &SubsetSpec {
        &self.spec
    }

    /// Parameter values in the order of the active lags.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Embeds the subset parameters into a full vector of length `p`, with
    /// exact zeros at inactive lags.
    pub fn full(&self) -> Vec<f64> {
        let mut full = vec![0.0; self.spec.order()];
        for (&lag, &v) in self.spec.lags().iter().zip(&self.values) {
            full[lag - 1] = v;
        }
        full
    }
}

/// AR coefficients `phi_1..phi_p` of the expanded model.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiVector {
    values: Vec<f64>,
}

impl PhiVector {
    pub fn new(values: Vec<f64>) -> Self {
        PhiVector { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Model order `p`.
    pub fn order(&self) -> usize {
        self.values.len()
    }
}

/// A fitted subset AR model: exact maximum-likelihood estimates together
/// with the large-sample information matrix and standard errors.
#[derive(Debug, Clone)]
pub struct FittedModel {
    pub spec: SubsetSpec,
    pub zeta: ZetaVector,
    pub phi: PhiVector,
    /// Sample mean of the training series (original units).
    pub mean: f64,
    /// Innovation variance estimate.
    pub sigma2: f64,
    /// Concentrated loglikelihood at the optimum.
    pub loglik: f64,
    /// Training sample size.
    pub n: usize,
    /// Fisher information per observation of the subset parameters (m x m).
    pub info: DMatrix<f64>,
    /// Per-parameter standard errors `sqrt((info^-1)_kk / n)`.
    pub stderr: Vec<f64>,
    /// Optimizer iterations used.
    pub iterations: usize,
}
