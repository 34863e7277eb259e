//! Comparator fits for the classical subset AR family that zeroes AR
//! coefficients directly (rather than partial autocorrelations).
//!
//! These exist to benchmark the partial-autocorrelation subsets against the
//! coefficient-subset alternative on the same exact-likelihood scale. The
//! admissible region in coefficient space is complicated, so the exact fit
//! walks unconstrained over the active coefficients and rejects
//! non-stationary points through the inverse transform.

use crate::error::{Error, Result};
use crate::likelihood::{build_kernel, SumOfSquaresKernel};
use crate::optim::{self, OptimOptions};
use crate::pacf::phi_to_zeta;
use crate::types::{PhiVector, SubsetSpec, TimeSeries};

/// A fitted coefficient-subset model.
#[derive(Debug, Clone)]
pub struct ArPhiFit {
    pub spec: SubsetSpec,
    /// Estimated coefficients at the active lags.
    pub coeffs: Vec<f64>,
    /// The order-`p` coefficient vector (zeros at inactive lags).
    pub phi: PhiVector,
    pub mean: f64,
    pub sigma2: f64,
    /// Exact concentrated loglikelihood (same convention as the
    /// partial-autocorrelation fits, so differences are comparable).
    pub loglik: f64,
    pub n: usize,
}

/// Conditional-least-squares fit: regression of `z_t` on the active lagged
/// values, `t = p+1..n`. Fast, and the initial point for [`fit_exact`].
pub fn fit_cls(series: &TimeSeries, spec: &SubsetSpec) -> Result<ArPhiFit> {
    use nalgebra::{DMatrix, DVector};
    let centered = series.centered();
    let z = centered.values();
    let n = z.len();
    let p = spec.order();
    if n <= p + spec.len() {
        return Err(Error::SeriesShorterThanOrder { n, p });
    }
    let rows = n - p;
    let m = spec.len();
    let x = DMatrix::from_fn(rows, m, |r, c| z[p + r - spec.lags()[c]]);
    let y = DVector::from_fn(rows, |r, _| z[p + r]);
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * y;
    let coeffs = xtx
        .cholesky()
        .ok_or(Error::SingularInformation {
            lags: spec.lags().to_vec(),
        })?
        .solve(&xty);
    let coeffs: Vec<f64> = coeffs.iter().copied().collect();

    let mut phi = vec![0.0; p];
    for (&lag, &c) in spec.lags().iter().zip(&coeffs) {
        phi[lag - 1] = c;
    }
    let mut ss = 0.0;
    for t in p..n {
        let mut a = z[t];
        for (i, &c) in phi.iter().enumerate() {
            a -= c * z[t - i - 1];
        }
        ss += a * a;
    }
    let sigma2 = ss / rows as f64;
    // indicative loglikelihood on the conditional scale
    let loglik = -(rows as f64 / 2.0) * sigma2.ln();
    Ok(ArPhiFit {
        spec: spec.clone(),
        coeffs,
        phi: PhiVector::new(phi),
        mean: centered.mean(),
        sigma2,
        loglik,
        n,
    })
}

/// Exact maximum-likelihood fit over the active coefficients.
///
/// The objective reuses the sum-of-squares kernel; the determinant term
/// comes from the inverse transform of the full coefficient vector, and
/// points outside the stationary region get a large finite penalty.
pub fn fit_exact(series: &TimeSeries, spec: &SubsetSpec) -> Result<ArPhiFit> {
    let centered = series.centered();
    let n = centered.len();
    let p = spec.order();
    let kernel = build_kernel(&centered, p)?;
    let init = fit_cls(&centered, spec)?;

    let lags = spec.lags().to_vec();
    let objective = exact_objective(&lags, &kernel);
    let gradient = |x: &[f64]| optim::central_difference(&objective, x, 1e-7);

    // Stationarity is enforced by penalty, not by the box; the wide bounds
    // only keep the search from wandering off.
    let lower = vec![-8.0; lags.len()];
    let upper = vec![8.0; lags.len()];
    let outcome = optim::minimize_box(
        &objective,
        &gradient,
        &init.coeffs,
        &lower,
        &upper,
        &OptimOptions::default(),
    );
    if !outcome.converged {
        return Err(Error::NoConvergence(OptimOptions::default().max_iterations));
    }
    let coeffs = outcome.x;
    let mut phi = vec![0.0; p];
    for (&lag, &c) in lags.iter().zip(&coeffs) {
        phi[lag - 1] = c;
    }
    let phi = PhiVector::new(phi);
    let zeta_full = phi_to_zeta(&phi)?;
    let log_gp: f64 = zeta_full
        .iter()
        .enumerate()
        .map(|(i, z)| -((i + 1) as f64) * (1.0 - z * z).ln())
        .sum();
    let s = kernel.sum_of_squares(phi.values());
    if s <= 0.0 || s.is_nan() {
        return Err(Error::NonPositiveS(s));
    }
    let sigma2 = s / n as f64;
    let loglik = -(n as f64 / 2.0) * sigma2.ln() - 0.5 * log_gp;
    Ok(ArPhiFit {
        spec: spec.clone(),
        coeffs,
        phi,
        mean: centered.mean(),
        sigma2,
        loglik,
        n,
    })
}

fn exact_objective<'a>(
    lags: &'a [usize],
    kernel: &'a SumOfSquaresKernel,
) -> impl Fn(&[f64]) -> f64 + 'a {
    let p = kernel.order();
    let n = kernel.series_len() as f64;
    move |x: &[f64]| {
        let mut phi = vec![0.0; p];
        for (&lag, &c) in lags.iter().zip(x) {
            phi[lag - 1] = c;
        }
        let zeta = match phi_to_zeta(&PhiVector::new(phi.clone())) {
            Ok(z) => z,
            Err(_) => return f64::MAX / 4.0,
        };
        if zeta.iter().any(|z| z.abs() >= 1.0 - 1e-10) {
            return f64::MAX / 4.0;
        }
        let s = kernel.sum_of_squares(&phi);
        if s <= 0.0 || s.is_nan() {
            return f64::MAX / 4.0;
        }
        let log_gp: f64 = zeta
            .iter()
            .enumerate()
            .map(|(i, z)| -((i + 1) as f64) * (1.0 - z * z).ln())
            .sum();
        (n / 2.0) * (s / n).ln() + 0.5 * log_gp
    }
}
