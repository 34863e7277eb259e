//! Simulation, point forecasting, holdout evaluation and the
//! power-transform skewness helper.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

use crate::diagnostics::psi_weights;
use crate::error::{Error, Result};
use crate::likelihood::fit_mle;
use crate::pacf::zeta_to_phi;
use crate::stats;
use crate::types::{FittedModel, SubsetSpec, TimeSeries, ZetaVector};

/// Simulation guard: parameters this close to the unit cube boundary give
/// process variances beyond ~1e8 times the innovation variance and are
/// rejected outright.
const SIM_BOUNDARY: f64 = 1e-8;

/// Controls for [`simulate_with`].
#[derive(Debug, Clone, Default)]
pub struct SimulationConfig {
    /// Warm-up length discarded before recording; `None` means `10 p + 100`.
    pub burn_in: Option<usize>,
    /// Draw the first `p` values from the exact stationary distribution
    /// (via the Cholesky factor of the process covariance) instead of
    /// starting the recursion at zero.
    pub stationary_start: bool,
}

/// Deterministic Gaussian variate stream.
///
/// Uniforms come from the ChaCha8 counter-based stream cipher (stable
/// across platforms and versions for a fixed 64-bit seed, taking the top
/// 53 bits of each 64-bit draw); normal variates use the Marsaglia polar
/// method. With the generator and transform pinned, a seeded simulation is
/// reproducible at the sequence-of-reals level.
pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        GaussianStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Next standard normal variate.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let factor = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * factor);
                return u * factor;
            }
        }
    }
}

/// Autocovariances `gamma_0..gamma_{count-1}` of the stationary AR process
/// with the given coefficients and innovation variance, from the
/// stationarity equations (linear solve for the first `p + 1` values, then
/// the recursion `gamma_k = sum phi_i gamma_{k-i}`).
pub fn ar_autocovariances(phi: &[f64], sigma2: f64, count: usize) -> Result<Vec<f64>> {
    use nalgebra::{DMatrix, DVector};
    let p = phi.len();
    if count == 0 {
        return Ok(vec![]);
    }
    if p == 0 {
        let mut g = vec![0.0; count];
        g[0] = sigma2;
        return Ok(g);
    }
    let mut a = DMatrix::<f64>::zeros(p + 1, p + 1);
    let mut b = DVector::<f64>::zeros(p + 1);
    for k in 0..=p {
        a[(k, k)] += 1.0;
        for i in 1..=p {
            a[(k, k.abs_diff(i))] -= phi[i - 1];
        }
        b[k] = if k == 0 { sigma2 } else { 0.0 };
    }
    let head = a.lu().solve(&b).ok_or(Error::NonStationary)?;
    if head[0] <= 0.0 {
        return Err(Error::NonStationary);
    }
    let mut g: Vec<f64> = head.iter().copied().collect();
    for k in p + 1..count {
        let mut s = 0.0;
        for i in 1..=p {
            s += phi[i - 1] * g[k - i];
        }
        g.push(s);
    }
    g.truncate(count);
    Ok(g)
}

/// Simulates `n` observations of the Gaussian subset AR process.
pub fn simulate(
    zeta: &ZetaVector,
    mean: f64,
    sigma2: f64,
    n: usize,
    seed: u64,
) -> Result<TimeSeries> {
    simulate_with(zeta, mean, sigma2, n, seed, &SimulationConfig::default())
}

/// [`simulate`] with explicit burn-in / start controls.
pub fn simulate_with(
    zeta: &ZetaVector,
    mean: f64,
    sigma2: f64,
    n: usize,
    seed: u64,
    cfg: &SimulationConfig,
) -> Result<TimeSeries> {
    if n < 2 {
        return Err(Error::TooShort { need: 2, got: n });
    }
    if sigma2 <= 0.0 || sigma2.is_nan() {
        return Err(Error::InvalidConfig(format!(
            "innovation variance must be positive, got {sigma2}"
        )));
    }
    for (&lag, &v) in zeta.spec().lags().iter().zip(zeta.values()) {
        if v.abs() >= 1.0 - SIM_BOUNDARY {
            return Err(Error::BoundaryParameter { lag, value: v });
        }
    }
    let p = zeta.spec().order();
    let phi = zeta_to_phi(zeta);
    let phi = phi.values();
    let sigma = sigma2.sqrt();
    let mut stream = GaussianStream::new(seed);

    let mut x: Vec<f64>;
    if cfg.stationary_start {
        use nalgebra::{Cholesky, DMatrix, DVector};
        let g = ar_autocovariances(phi, sigma2, p.max(1))?;
        let gp = DMatrix::from_fn(p, p, |i, j| g[i.abs_diff(j)]);
        let chol = Cholesky::new(gp).ok_or(Error::NonStationary)?;
        let e = DVector::from_fn(p, |_, _| stream.next_normal());
        let start = chol.l() * e;
        x = Vec::with_capacity(n + p);
        x.extend(start.iter().copied());
        for _ in 0..n {
            let t = x.len();
            let mut v = sigma * stream.next_normal();
            for (i, &c) in phi.iter().enumerate() {
                v += c * x[t - i - 1];
            }
            x.push(v);
        }
        x.drain(..p);
    } else {
        let burn = cfg.burn_in.unwrap_or(10 * p + 100);
        x = vec![0.0; burn + n];
        for t in 0..burn + n {
            let mut v = sigma * stream.next_normal();
            for (i, &c) in phi.iter().enumerate() {
                if t > i {
                    v += c * x[t - i - 1];
                }
            }
            x[t] = v;
        }
        x.drain(..burn);
    }
    for v in &mut x {
        *v += mean;
    }
    TimeSeries::new(x)
}

/// Point forecasts with their innovation-based standard errors.
#[derive(Debug, Clone)]
pub struct ForecastResult {
    /// Index of the last observation used (1-based; forecasts start there).
    pub origin: usize,
    pub horizon: usize,
    /// Forecasts in original units (mean restored).
    pub forecasts: Vec<f64>,
    /// `sigma_a sqrt(sum_{j<h} psi_j^2)` per horizon; nondecreasing.
    pub stderr: Vec<f64>,
}

/// Minimum-mean-square-error forecasts from the AR recursion with future
/// innovations set to zero.
pub fn forecast(
    model: &FittedModel,
    history: &TimeSeries,
    horizon: usize,
) -> Result<ForecastResult> {
    let p = model.spec.order();
    if history.len() < p {
        return Err(Error::HistoryTooShort {
            need: p,
            got: history.len(),
        });
    }
    if horizon == 0 {
        return Err(Error::InvalidConfig("horizon must be at least 1".into()));
    }
    let centered: Vec<f64> = if history.is_centered() {
        history.values().to_vec()
    } else {
        history.values().iter().map(|v| v - model.mean).collect()
    };
    let mean_shift = if history.is_centered() {
        history.mean()
    } else {
        model.mean
    };
    let phi = model.phi.values();
    let mut extended = centered;
    let origin = extended.len();
    for _ in 0..horizon {
        let t = extended.len();
        let mut v = 0.0;
        for (i, &c) in phi.iter().enumerate() {
            v += c * extended[t - i - 1];
        }
        extended.push(v);
    }
    let forecasts: Vec<f64> = extended[origin..].iter().map(|v| v + mean_shift).collect();
    let psi = psi_weights(phi, horizon);
    let sigma = model.sigma2.sqrt();
    let mut cum = 0.0;
    let stderr: Vec<f64> = psi
        .iter()
        .map(|w| {
            cum += w * w;
            sigma * cum.sqrt()
        })
        .collect();
    Ok(ForecastResult {
        origin,
        horizon,
        forecasts,
        stderr,
    })
}

/// One row of a holdout comparison.
#[derive(Debug, Clone)]
pub struct HoldoutEntry {
    pub spec: SubsetSpec,
    pub loglik: f64,
    pub sigma2: f64,
    /// `-2 loglik + m log(n_train)`.
    pub bic: f64,
    /// Root mean squared one-step forecast error over the test segment.
    pub rmse: f64,
}

/// Holdout evaluation across candidate lag sets.
#[derive(Debug, Clone)]
pub struct HoldoutReport {
    pub train_len: usize,
    pub test_len: usize,
    pub entries: Vec<HoldoutEntry>,
    /// Lag sets whose fit failed, with the failure text.
    pub failures: Vec<(SubsetSpec, String)>,
}

/// Fits each lag set on `series[..split]`, then rolls one-step forecasts
/// across the test segment with the parameters held fixed (no
/// re-estimation) and reports the RMSE per model. Per-model failures are
/// collected without aborting the batch.
pub fn holdout_eval(
    series: &TimeSeries,
    split: usize,
    specs: &[SubsetSpec],
) -> Result<HoldoutReport> {
    let n = series.len();
    if split >= n || split < 11 {
        return Err(Error::InvalidConfig(format!(
            "split {split} must leave at least 11 training and one test point in a series of length {n}"
        )));
    }
    let values = series.values();
    let train = TimeSeries::new(values[..split].to_vec())?;

    let outcomes: Vec<(SubsetSpec, std::result::Result<HoldoutEntry, String>)> = specs
        .par_iter()
        .map(|spec| {
            // the order precondition is per lag set so one oversized model
            // cannot abort the whole comparison
            if split < spec.order() + 10 {
                return (
                    spec.clone(),
                    Err(Error::SeriesShorterThanOrder {
                        n: split,
                        p: spec.order(),
                    }
                    .to_string()),
                );
            }
            let outcome = fit_mle(&train, spec, None).map(|fit| {
                let mut sq_sum = 0.0;
                let phi = fit.phi.values();
                for t in split..n {
                    let mut pred = fit.mean;
                    for (i, &c) in phi.iter().enumerate() {
                        pred += c * (values[t - i - 1] - fit.mean);
                    }
                    let err = values[t] - pred;
                    sq_sum += err * err;
                }
                let rmse = (sq_sum / (n - split) as f64).sqrt();
                HoldoutEntry {
                    spec: spec.clone(),
                    loglik: fit.loglik,
                    sigma2: fit.sigma2,
                    bic: -2.0 * fit.loglik + spec.len() as f64 * (split as f64).ln(),
                    rmse,
                }
            });
            (spec.clone(), outcome.map_err(|e| e.to_string()))
        })
        .collect();

    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for (spec, outcome) in outcomes {
        match outcome {
            Ok(entry) => entries.push(entry),
            Err(msg) => failures.push((spec, msg)),
        }
    }
    Ok(HoldoutReport {
        train_len: split,
        test_len: n - split,
        entries,
        failures,
    })
}

/// Coefficient of skewness `g1` of the power-transformed data `z^lambda`
/// for each exponent. `lambda = 0` is treated as the log transform.
/// Fractional exponents require nonnegative data.
pub fn skewness_scan(values: &[f64], exponents: &[f64]) -> Result<Vec<f64>> {
    exponents
        .iter()
        .map(|&lambda| {
            let transformed: Result<Vec<f64>> = values
                .iter()
                .map(|&v| {
                    if lambda == 0.0 {
                        if v <= 0.0 {
                            return Err(Error::NegativeBase(v));
                        }
                        return Ok(v.ln());
                    }
                    if v < 0.0 && lambda.fract() != 0.0 {
                        return Err(Error::NegativeBase(v));
                    }
                    Ok(v.powf(lambda))
                })
                .collect();
            Ok(stats::skewness(&transformed?))
        })
        .collect()
}
