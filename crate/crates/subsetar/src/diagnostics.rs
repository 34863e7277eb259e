//! Residual diagnostics: residual autocorrelations, their large-sample
//! covariance, the Ljung-Box portmanteau test and Bonferroni simultaneous
//! bands.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::inference;
use crate::stats;
use crate::types::{FittedModel, TimeSeries};

/// Model residuals with the initial `p` values set to zero.
#[derive(Debug, Clone)]
pub struct ResidualSeries {
    values: Vec<f64>,
    p: usize,
}

impl ResidualSeries {
    /// All residuals, length `n`; entries `t <= p` are exactly zero.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn order(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Residuals `a_t = z_t - phi_1 z_{t-1} - .. - phi_p z_{t-p}` of the
/// mean-corrected series, for `t = p+1..n`; the initial values are set to
/// zero (adequate for all the large-sample diagnostics here).
pub fn residuals(series: &TimeSeries, model: &FittedModel) -> Result<ResidualSeries> {
    let p = model.spec.order();
    let n = series.len();
    if n <= p {
        return Err(Error::OrderExceedsLength { p, n });
    }
    let centered: Vec<f64> = if series.is_centered() {
        series.values().to_vec()
    } else {
        series.values().iter().map(|v| v - model.mean).collect()
    };
    let phi = model.phi.values();
    let mut out = vec![0.0; n];
    for t in p..n {
        let mut a = centered[t];
        for (i, &c) in phi.iter().enumerate() {
            a -= c * centered[t - i - 1];
        }
        out[t] = a;
    }
    Ok(ResidualSeries { values: out, p })
}

/// Residual autocorrelations `r_k = c_k / c_0` for `k = 1..=lag_max`, with
/// `c_k = n^{-1} sum_{t=k+1..n} a_{t-k} a_t` (divisor `n`, not `n - k`).
pub fn residual_acf(res: &ResidualSeries, lag_max: usize) -> Result<Vec<f64>> {
    let n = res.len();
    if lag_max >= n.saturating_sub(res.order()) {
        return Err(Error::InvalidConfig(format!(
            "lag_max {lag_max} too large for {} residuals of a model of order {}",
            n,
            res.order()
        )));
    }
    let a = res.values();
    let c0 = a.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if c0 <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((1..=lag_max)
        .map(|k| {
            let ck = (k..n).map(|t| a[t - k] * a[t]).sum::<f64>() / n as f64;
            ck / c0
        })
        .collect())
}

/// Coefficients of the moving-average expansion `1/phi(B)`: `psi_0 = 1`,
/// `psi_j = sum_{i=1..min(j,p)} phi_i psi_{j-i}`.
pub fn psi_weights(phi: &[f64], count: usize) -> Vec<f64> {
    let p = phi.len();
    let mut psi = Vec::with_capacity(count);
    if count == 0 {
        return psi;
    }
    psi.push(1.0);
    for j in 1..count {
        let mut s = 0.0;
        for i in 1..=j.min(p) {
            s += phi[i - 1] * psi[j - i];
        }
        psi.push(s);
    }
    psi
}

/// Large-sample covariance of the first `lag_max` residual
/// autocorrelations (times `n`):
///
/// ```text
/// V_r = I_L - X J I_zeta^{-1} J' X'
/// ```
///
/// where `X` is the `L x p` band matrix of the moving-average weights
/// (`X[i,j] = psi_{i-j}`). The identity is L-dimensional; `V_r` is
/// approximately idempotent with rank `L - m` once `L` is large.
pub fn residual_covariance(model: &FittedModel, lag_max: usize) -> Result<DMatrix<f64>> {
    let p = model.spec.order();
    let m = model.spec.len();
    if lag_max < m {
        return Err(Error::InvalidConfig(format!(
            "need at least m = {m} lags, got {lag_max}"
        )));
    }
    let matrices = inference::information_matrices(&model.zeta)?;
    let info_inv = inference::invert_spd(&matrices.izeta, model.spec.lags())?;
    let psi = psi_weights(model.phi.values(), lag_max);
    let mut x = DMatrix::zeros(lag_max, p);
    for i in 0..lag_max {
        for j in 0..p.min(i + 1) {
            x[(i, j)] = psi[i - j];
        }
    }
    let xj = &x * &matrices.jzeta; // L x m
    let v = DMatrix::identity(lag_max, lag_max) - &xj * info_inv * xj.transpose();
    Ok((&v + v.transpose()) * 0.5)
}

/// A portmanteau test result.
#[derive(Debug, Clone)]
pub struct LjungBoxTest {
    /// `Q_L = n (n+2) sum_k r_k^2 / (n-k)`.
    pub statistic: f64,
    /// `L - m` degrees of freedom.
    pub df: usize,
    /// Upper-tail chi-squared probability.
    pub p_value: f64,
    /// Number of autocorrelations pooled.
    pub lags: usize,
}

/// Ljung-Box statistic over the first `lag_max` residual autocorrelations
/// of a model with `m` estimated coefficients.
pub fn ljung_box(racf: &[f64], n: usize, m: usize, lag_max: usize) -> Result<LjungBoxTest> {
    if lag_max <= m {
        return Err(Error::DegreesOfFreedomNonPositive { lags: lag_max, m });
    }
    if racf.len() < lag_max || lag_max >= n {
        return Err(Error::InvalidConfig(format!(
            "need {lag_max} autocorrelations below n = {n}, got {}",
            racf.len()
        )));
    }
    let nf = n as f64;
    let q = nf
        * (nf + 2.0)
        * (1..=lag_max)
            .map(|k| racf[k - 1] * racf[k - 1] / (nf - k as f64))
            .sum::<f64>();
    let df = lag_max - m;
    Ok(LjungBoxTest {
        statistic: q,
        df,
        p_value: stats::chi_squared_sf(q, df),
        lags: lag_max,
    })
}

/// Bonferroni multiplier for simultaneous bands over `count` statistics:
/// `Phi^{-1}(1 - alpha / (2 count))`. With `count = 1` this is the
/// pointwise normal quantile (1.96 at the 5% level).
pub fn bonferroni_multiplier(alpha: f64, count: usize) -> f64 {
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must be in (0, 1)");
    let count = count.max(1);
    stats::normal_quantile(1.0 - alpha / (2.0 * count as f64))
}

/// Per-lag simultaneous band half-widths
/// `Phi^{-1}(1 - alpha/(2 count)) sqrt(v_kk / n)` from the diagonal of the
/// residual-autocorrelation covariance.
pub fn simultaneous_bands(vr: &DMatrix<f64>, n: usize, alpha: f64, count: usize) -> Vec<f64> {
    let mult = bonferroni_multiplier(alpha, count);
    (0..vr.nrows())
        .map(|k| mult * (vr[(k, k)] / n as f64).sqrt())
        .collect()
}

/// Complete residual diagnostics for one fitted model.
#[derive(Debug, Clone)]
pub struct DiagnosticsReport {
    pub lag_max: usize,
    pub racf: Vec<f64>,
    pub vr: DMatrix<f64>,
    /// `sqrt(v_kk / n)` per lag.
    pub est_sd: Vec<f64>,
    pub band_multiplier: f64,
    /// Simultaneous band half-widths per lag.
    pub band_halfwidth: Vec<f64>,
    pub test: LjungBoxTest,
}

/// Runs the full diagnostic chain: residuals, autocorrelations, covariance,
/// bands over all `lag_max` lags, and the portmanteau test.
pub fn diagnose(
    series: &TimeSeries,
    model: &FittedModel,
    lag_max: usize,
    alpha: f64,
) -> Result<DiagnosticsReport> {
    let res = residuals(series, model)?;
    let racf = residual_acf(&res, lag_max)?;
    let vr = residual_covariance(model, lag_max)?;
    let n = series.len();
    let est_sd: Vec<f64> = (0..lag_max)
        .map(|k| (vr[(k, k)].max(0.0) / n as f64).sqrt())
        .collect();
    let band_multiplier = bonferroni_multiplier(alpha, lag_max);
    let band_halfwidth: Vec<f64> = est_sd.iter().map(|s| band_multiplier * s).collect();
    let test = ljung_box(&racf, n, model.spec.len(), lag_max)?;
    Ok(DiagnosticsReport {
        lag_max,
        racf,
        vr,
        est_sd,
        band_multiplier,
        band_halfwidth,
        test,
    })
}
