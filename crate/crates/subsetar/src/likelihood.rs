//! Exact Gaussian likelihood for subset AR models and its maximization.
//!
//! The likelihood is evaluated through a precomputed sum-of-squares kernel:
//! building it costs O(n p^2) once, after which every evaluation is O(p^2)
//! regardless of the series length.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::inference;
use crate::optim::{self, OptimOptions};
use crate::pacf::{self, zeta_to_phi_full};
use crate::types::{FittedModel, SubsetSpec, TimeSeries, ZetaVector};

/// Optimizer bound: parameters are searched inside `[-(1-1e-7), 1-1e-7]`.
pub const FIT_BOUND: f64 = 1.0 - 1e-7;

/// Precomputed quadratic-form kernel for the exact sum of squares.
///
/// `D` is the `(p+1) x (p+1)` matrix whose `(a, b)` entry (0-based lags
/// `a, b`) is the sum of lagged products
///
/// ```text
/// D[a,b] = sum_{s=0}^{n-1-a-b} z_{a+1+s} z_{b+1+s}
/// ```
///
/// so that `S(phi) = beta' D beta` with `beta = (-1, phi_1..phi_p)` equals
/// `sigma^2 z' Gamma_n^{-1} z` exactly (the end corrections of the
/// unconditional AR sum of squares). The identity requires `n >= 2p`; below
/// that the end-correction windows overlap and the kernel is not used.
#[derive(Debug, Clone)]
pub struct SumOfSquaresKernel {
    d: DMatrix<f64>,
    n: usize,
    p: usize,
}

impl SumOfSquaresKernel {
    pub fn order(&self) -> usize {
        self.p
    }

    pub fn series_len(&self) -> usize {
        self.n
    }

    /// Entry of the kernel matrix by 0-based lag pair.
    pub fn entry(&self, a: usize, b: usize) -> f64 {
        self.d[(a, b)]
    }

    /// Evaluates `S(phi) = beta' D beta`, `beta = (-1, phi)`. O(p^2).
    pub fn sum_of_squares(&self, phi: &[f64]) -> f64 {
        debug_assert_eq!(phi.len(), self.p);
        let mut beta = Vec::with_capacity(self.p + 1);
        beta.push(-1.0);
        beta.extend_from_slice(phi);
        let mut s = 0.0;
        for a in 0..=self.p {
            let row = self.d.row(a);
            let mut acc = 0.0;
            for b in 0..=self.p {
                acc += row[b] * beta[b];
            }
            s += beta[a] * acc;
        }
        s
    }

    /// Gradient of `S` with respect to `phi`: `2 (D beta)_{1..p}`.
    pub fn sum_of_squares_gradient(&self, phi: &[f64]) -> Vec<f64> {
        let mut beta = Vec::with_capacity(self.p + 1);
        beta.push(-1.0);
        beta.extend_from_slice(phi);
        (1..=self.p)
            .map(|k| {
                let row = self.d.row(k);
                2.0 * (0..=self.p).map(|b| row[b] * beta[b]).sum::<f64>()
            })
            .collect()
    }
}

/// Builds the kernel for a centered series and model order `p`.
///
/// One-time O(n p^2) cost; the kernel is immutable afterwards and can be
/// shared across fits of different lag subsets with the same order.
pub fn build_kernel(series: &TimeSeries, p: usize) -> Result<SumOfSquaresKernel> {
    if !series.is_centered() {
        return Err(Error::InvalidConfig(
            "kernel requires a centered series".into(),
        ));
    }
    let z = series.values();
    let n = z.len();
    if p == 0 || n <= p {
        return Err(Error::SeriesShorterThanOrder { n, p });
    }
    let mut d = DMatrix::zeros(p + 1, p + 1);
    for a in 0..=p {
        for b in a..=p {
            let overlap = n.saturating_sub(a + b);
            let mut s = 0.0;
            for t in 0..overlap {
                s += z[a + t] * z[b + t];
            }
            d[(a, b)] = s;
            d[(b, a)] = s;
        }
    }
    Ok(SumOfSquaresKernel { d, n, p })
}

/// Determinant `g_p = det(Gamma_p / sigma^2) = prod_i (1 - zeta_i^2)^{-i}`
/// over the active lags. Equals 1 exactly when all parameters are zero.
pub fn gp_determinant(zeta: &ZetaVector) -> f64 {
    gp_log_determinant(zeta).exp()
}

/// `log g_p`, the numerically safe form used in the likelihood.
pub fn gp_log_determinant(zeta: &ZetaVector) -> f64 {
    log_gp(zeta.spec().lags(), zeta.values())
}

fn log_gp(lags: &[usize], values: &[f64]) -> f64 {
    lags.iter()
        .zip(values)
        .map(|(&lag, &z)| -(lag as f64) * (1.0 - z * z).ln())
        .sum()
}

/// One likelihood evaluation.
#[derive(Debug, Clone)]
pub struct LikelihoodValue {
    /// `log g_p` (non-negative for interior parameters).
    pub log_gp: f64,
    /// The exact sum of squares `S(zeta)`.
    pub sum_sq: f64,
    /// Profiled innovation variance `S / n`.
    pub sigma2: f64,
    /// Concentrated loglikelihood `-(n/2) log(sigma2) - log(g_p)/2`.
    pub loglik: f64,
}

/// Concentrated loglikelihood of the subset parameters through the kernel.
pub fn concentrated_loglik(
    zeta: &ZetaVector,
    kernel: &SumOfSquaresKernel,
) -> Result<LikelihoodValue> {
    let p = zeta.spec().order();
    if kernel.order() < p {
        return Err(Error::InvalidConfig(format!(
            "kernel order {} is below the model order {p}",
            kernel.order()
        )));
    }
    let mut full = vec![0.0; kernel.order()];
    for (slot, v) in full.iter_mut().zip(zeta.full()) {
        *slot = v;
    }
    let phi = zeta_to_phi_full(&full);
    let sum_sq = kernel.sum_of_squares(&phi);
    if sum_sq <= 0.0 || sum_sq.is_nan() {
        return Err(Error::NonPositiveS(sum_sq));
    }
    let n = kernel.series_len() as f64;
    let log_gp = gp_log_determinant(zeta);
    let sigma2 = sum_sq / n;
    Ok(LikelihoodValue {
        log_gp,
        sum_sq,
        sigma2,
        loglik: -(n / 2.0) * sigma2.ln() - 0.5 * log_gp,
    })
}

/// Fitting controls.
#[derive(Debug, Clone)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Relative loglikelihood tolerance.
    pub f_tol: f64,
    /// Max-norm parameter step tolerance.
    pub step_tol: f64,
    /// Use the analytic gradient (chain rule through the expansion
    /// Jacobian) instead of central differences.
    pub analytic_gradient: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 500,
            f_tol: 1e-9,
            step_tol: 1e-8,
            analytic_gradient: false,
        }
    }
}

/// Maximum-likelihood fit of a subset AR model.
///
/// Centers the series if needed, builds the kernel, starts from the Burg
/// partial autocorrelations at the active lags (asymptotically efficient
/// initial values) unless `init` is given, and maximizes the concentrated
/// loglikelihood over the open cube with a box-constrained quasi-Newton
/// search. A fit that finishes pinned at the box bound is retried through a
/// smooth tanh reparameterization and reported as
/// [`Error::BoundaryConvergence`] if still pinned.
pub fn fit_mle(
    series: &TimeSeries,
    spec: &SubsetSpec,
    init: Option<&ZetaVector>,
) -> Result<FittedModel> {
    fit_mle_with(series, spec, init, &FitOptions::default())
}

/// [`fit_mle`] with explicit options.
pub fn fit_mle_with(
    series: &TimeSeries,
    spec: &SubsetSpec,
    init: Option<&ZetaVector>,
    opts: &FitOptions,
) -> Result<FittedModel> {
    let centered = series.centered();
    let n = centered.len();
    let p = spec.order();
    if n <= p {
        return Err(Error::SeriesShorterThanOrder { n, p });
    }
    let kernel = build_kernel(&centered, p)?;

    let x0: Vec<f64> = match init {
        Some(z) => {
            if z.spec() != spec {
                return Err(Error::InvalidConfig(
                    "initial values were built for a different lag set".into(),
                ));
            }
            z.values().to_vec()
        }
        None => {
            let burg = pacf::burg_pacf(&centered, p)?;
            spec.lags()
                .iter()
                .map(|&lag| burg.estimates()[lag - 1].clamp(-FIT_BOUND, FIT_BOUND))
                .collect()
        }
    };

    let lags = spec.lags().to_vec();
    let objective = make_objective(&lags, &kernel);
    let gradient = make_gradient(&lags, &kernel, opts.analytic_gradient);

    let optim_opts = OptimOptions {
        max_iterations: opts.max_iterations,
        f_tol: opts.f_tol,
        step_tol: opts.step_tol,
    };
    let lower = vec![-FIT_BOUND; lags.len()];
    let upper = vec![FIT_BOUND; lags.len()];
    let mut outcome = optim::minimize_box(&objective, &gradient, &x0, &lower, &upper, &optim_opts);

    if outcome.converged && at_bound(&outcome.x) {
        // Smooth fallback: the bound may only be a line-search artifact.
        let retry = optim::minimize_tanh(&objective, &gradient, &outcome.x, FIT_BOUND, &optim_opts);
        if retry.f <= outcome.f {
            outcome.iterations += retry.iterations;
            outcome.x = retry.x;
            outcome.f = retry.f;
            outcome.converged = retry.converged;
        }
    }
    if !outcome.converged {
        return Err(Error::NoConvergence(opts.max_iterations));
    }
    if let Some(idx) = pinned_index(&outcome.x) {
        return Err(Error::BoundaryConvergence {
            lag: lags[idx],
            value: outcome.x[idx],
        });
    }

    let zeta = ZetaVector::new(spec.clone(), outcome.x)?;
    let value = concentrated_loglik(&zeta, &kernel)?;
    let phi = pacf::zeta_to_phi(&zeta);
    let info = inference::zeta_information(&zeta)?;
    let stderr = inference::zeta_stderr(&zeta, n)?;

    Ok(FittedModel {
        spec: spec.clone(),
        zeta,
        phi,
        mean: centered.mean(),
        sigma2: value.sigma2,
        loglik: value.loglik,
        n,
        info,
        stderr,
        iterations: outcome.iterations,
    })
}

fn at_bound(x: &[f64]) -> bool {
    x.iter().any(|v| v.abs() >= FIT_BOUND - 1e-12)
}

fn pinned_index(x: &[f64]) -> Option<usize> {
    x.iter().position(|v| v.abs() >= FIT_BOUND - 1e-9)
}

/// Negative concentrated loglikelihood over the active parameters, with a
/// large finite penalty wherever the evaluation breaks down so the line
/// search simply backs away.
fn make_objective<'a>(
    lags: &'a [usize],
    kernel: &'a SumOfSquaresKernel,
) -> impl Fn(&[f64]) -> f64 + 'a {
    let p = kernel.order();
    let n = kernel.series_len() as f64;
    move |x: &[f64]| {
        let mut full = vec![0.0; p];
        for (&lag, &v) in lags.iter().zip(x) {
            full[lag - 1] = v;
        }
        let phi = zeta_to_phi_full(&full);
        let s = kernel.sum_of_squares(&phi);
        if s <= 0.0 || s.is_nan() || x.iter().any(|v| v.abs() >= 1.0) {
            return f64::MAX / 4.0;
        }
        (n / 2.0) * (s / n).ln() + 0.5 * log_gp(lags, x)
    }
}

type GradientFn<'a> = Box<dyn Fn(&[f64]) -> Vec<f64> + 'a>;

fn make_gradient<'a>(
    lags: &'a [usize],
    kernel: &'a SumOfSquaresKernel,
    analytic: bool,
) -> GradientFn<'a> {
    if analytic {
        Box::new(move |x: &[f64]| analytic_gradient(lags, kernel, x))
    } else {
        let objective = make_objective(lags, kernel);
        Box::new(move |x: &[f64]| optim::central_difference(&objective, x, 1e-6))
    }
}

/// Analytic gradient of the negative concentrated loglikelihood:
/// `(n/2) (J' dS/dphi) / S + d(log g_p)/dzeta / 2` with
/// `d(log g_p)/dzeta_i = 2 i zeta_i / (1 - zeta_i^2)`.
fn analytic_gradient(lags: &[usize], kernel: &SumOfSquaresKernel, x: &[f64]) -> Vec<f64> {
    let p = kernel.order();
    let n = kernel.series_len() as f64;
    let mut full = vec![0.0; p];
    for (&lag, &v) in lags.iter().zip(x) {
        full[lag - 1] = v;
    }
    let phi = zeta_to_phi_full(&full);
    let s = kernel.sum_of_squares(&phi);
    let ds_dphi = kernel.sum_of_squares_gradient(&phi);
    let jac = inference::jacobian_full(&full);
    lags.iter()
        .zip(x)
        .map(|(&lag, &zi)| {
            let col = lag - 1;
            let mut ds_dzeta = 0.0;
            for row in 0..p {
                ds_dzeta += ds_dphi[row] * jac[(row, col)];
            }
            (n / 2.0) * ds_dzeta / s + (lag as f64) * zi / (1.0 - zi * zi)
        })
        .collect()
}
