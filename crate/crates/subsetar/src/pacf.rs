//! The order-recursive map between partial autocorrelations and AR
//! coefficients, Burg and Yule-Walker estimation of the partial
//! autocorrelations, and the table behind the identification plot.

use crate::error::{Error, Result};
use crate::types::{PhiVector, SubsetSpec, TimeSeries, ZetaVector};

/// Intermediate rows of the Durbin-Levinson recursion: `row(k)` holds the
/// coefficients `phi_{1,k}..phi_{k,k}` of the order-`k` fit.
#[derive(Debug, Clone)]
pub struct DurbinLevinsonTable {
    rows: Vec<Vec<f64>>,
}

impl DurbinLevinsonTable {
    /// Runs the recursion
    /// `phi_{j,k+1} = phi_{j,k} - zeta_{k+1} phi_{k+1-j,k}` upward from the
    /// given partial autocorrelations (one per lag `1..=p`, zeros allowed).
    pub fn from_zeta(full_zeta: &[f64]) -> Self {
        let p = full_zeta.len();
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(p);
        let mut current: Vec<f64> = Vec::with_capacity(p);
        for (k, &zk) in full_zeta.iter().enumerate() {
            // k is 0-based; building the order-(k+1) row.
            let mut next = Vec::with_capacity(k + 1);
            for j in 0..k {
                next.push(current[j] - zk * current[k - 1 - j]);
            }
            next.push(zk);
            rows.push(next.clone());
            current = next;
        }
        DurbinLevinsonTable { rows }
    }

    /// Coefficients of the order-`k` fit (`k` is 1-based, `1..=p`).
    pub fn row(&self, k: usize) -> &[f64] {
        &self.rows[k - 1]
    }

    /// The diagonal `phi_{k,k}`, equal to the input partial autocorrelations.
    pub fn diagonal(&self) -> Vec<f64> {
        self.rows.iter().map(|r| *r.last().unwrap()).collect()
    }

    /// The final row: AR coefficients of the order-`p` model.
    pub fn final_row(&self) -> &[f64] {
        self.rows.last().map(|r| r.as_slice()).unwrap_or(&[])
    }

    pub fn order(&self) -> usize {
        self.rows.len()
    }
}

/// Expands a full-length partial-autocorrelation vector into AR
/// coefficients. Each output coefficient is a polynomial (multilinear) in
/// the inputs.
pub fn zeta_to_phi_full(full_zeta: &[f64]) -> Vec<f64> {
    DurbinLevinsonTable::from_zeta(full_zeta)
        .final_row()
        .to_vec()
}

/// Expands subset parameters into the induced order-`p` AR coefficients,
/// treating absent lags as exact zeros.
pub fn zeta_to_phi(zeta: &ZetaVector) -> PhiVector {
    PhiVector::new(zeta_to_phi_full(&zeta.full()))
}

/// Inverts the Durbin-Levinson recursion level by level (Monahan-style
/// back-recursion), recovering the full partial-autocorrelation vector.
///
/// Fails with [`Error::NonStationary`] when any recovered value reaches the
/// unit cube boundary or a back-step divisor `1 - zeta_k^2` underflows.
pub fn phi_to_zeta(phi: &PhiVector) -> Result<Vec<f64>> {
    let p = phi.order();
    let mut work = phi.values().to_vec();
    let mut zeta = vec![0.0; p];
    for k in (1..=p).rev() {
        let zk = work[k - 1];
        if !zk.is_finite() || zk.abs() >= 1.0 {
            return Err(Error::NonStationary);
        }
        zeta[k - 1] = zk;
        let denom = 1.0 - zk * zk;
        if denom.abs() < 1e-14 {
            return Err(Error::NonStationary);
        }
        let mut prev = Vec::with_capacity(k - 1);
        for j in 0..k - 1 {
            prev.push((work[j] + zk * work[k - 2 - j]) / denom);
        }
        work[..k - 1].copy_from_slice(&prev);
    }
    Ok(zeta)
}

/// Estimation method behind a [`PacfTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacfMethod {
    /// Forward-backward lattice least squares; reflection coefficients are
    /// guaranteed inside `[-1, 1]` and are asymptotically efficient
    /// estimates of the partial autocorrelations.
    Burg,
    /// Levinson-Durbin on the biased sample autocovariances. Offered for
    /// comparison; typically less accurate than Burg.
    YuleWalker,
}

impl std::fmt::Display for PacfMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PacfMethod::Burg => write!(f, "burg"),
            PacfMethod::YuleWalker => write!(f, "yule-walker"),
        }
    }
}

/// Estimated partial autocorrelations for lags `1..=lag_max`, with the
/// residual-variance sequence of the lattice recursion and, once computed,
/// per-lag standard errors for the identification plot.
#[derive(Debug, Clone)]
pub struct PacfTable {
    method: PacfMethod,
    n: usize,
    estimates: Vec<f64>,
    /// `residual_variance[k]` is the stage-`k` innovation-variance estimate;
    /// index 0 holds the sample variance `c0`.
    residual_variance: Vec<f64>,
    stderr: Option<Vec<f64>>,
}

impl PacfTable {
    /// Wraps externally computed partial autocorrelations (for scoring
    /// precomputed tables). The residual-variance sequence is derived from
    /// the supplied sample variance `c0` through the lattice identity
    /// `v_k = v_{k-1} (1 - pacf_k^2)`.
    pub fn from_estimates(method: PacfMethod, n: usize, c0: f64, estimates: Vec<f64>) -> Self {
        let mut residual_variance = Vec::with_capacity(estimates.len() + 1);
        residual_variance.push(c0);
        for (k, e) in estimates.iter().enumerate() {
            residual_variance.push(residual_variance[k] * (1.0 - e * e));
        }
        PacfTable {
            method,
            n,
            estimates,
            residual_variance,
            stderr: None,
        }
    }

    pub fn method(&self) -> PacfMethod {
        self.method
    }

    pub fn series_len(&self) -> usize {
        self.n
    }

    pub fn lag_max(&self) -> usize {
        self.estimates.len()
    }

    /// `estimates()[k-1]` is the estimated partial autocorrelation at lag k.
    pub fn estimates(&self) -> &[f64] {
        &self.estimates
    }

    /// Residual variance after fitting each order, starting at `c0`.
    pub fn residual_variance(&self) -> &[f64] {
        &self.residual_variance
    }

    /// Per-lag standard errors, if [`PacfTable::compute_stderr`] has run.
    pub fn stderr(&self) -> Option<&[f64]> {
        self.stderr.as_deref()
    }

    /// Fills in the per-lag standard errors (see [`pacf_stderr`]).
    pub fn compute_stderr(&mut self) -> Result<()> {
        if self.stderr.is_none() {
            self.stderr = Some(pacf_stderr(&self.estimates, self.n)?);
        }
        Ok(())
    }
}

/// Burg estimates of the partial autocorrelations for lags `1..=lag_max`.
///
/// Requires a centered series and `1 <= lag_max < n`. The reflection
/// coefficient at each stage is a ratio `2 sum(f b) / sum(f^2 + b^2)` and
/// therefore always lies in `[-1, 1]`.
pub fn burg_pacf(series: &TimeSeries, lag_max: usize) -> Result<PacfTable> {
    let z = centered_values(series)?;
    let n = z.len();
    if lag_max == 0 || lag_max >= n {
        return Err(Error::InvalidConfig(format!(
            "lag_max must satisfy 1 <= lag_max < n = {n}, got {lag_max}"
        )));
    }

    let mut fwd = z.clone();
    let mut bwd = z.clone();
    let mut estimates = Vec::with_capacity(lag_max);
    let c0 = z.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let mut residual_variance = vec![c0];

    for k in 1..=lag_max {
        let mut num = 0.0;
        let mut den = 0.0;
        for t in k..n {
            num += fwd[t] * bwd[t - 1];
            den += fwd[t] * fwd[t] + bwd[t - 1] * bwd[t - 1];
        }
        if den <= 0.0 || !den.is_finite() {
            return Err(Error::DegenerateSeries(k));
        }
        let rc = 2.0 * num / den;
        estimates.push(rc);
        residual_variance.push(residual_variance[k - 1] * (1.0 - rc * rc));
        // Lattice update; downward sweep keeps the lagged backward errors
        // readable before they are overwritten.
        for t in (k..n).rev() {
            let f = fwd[t];
            let b = bwd[t - 1];
            fwd[t] = f - rc * b;
            bwd[t] = b - rc * f;
        }
    }

    Ok(PacfTable {
        method: PacfMethod::Burg,
        n,
        estimates,
        residual_variance,
        stderr: None,
    })
}

/// Yule-Walker estimates of the partial autocorrelations: Levinson-Durbin
/// applied to the biased sample autocovariances.
pub fn yule_walker_pacf(series: &TimeSeries, lag_max: usize) -> Result<PacfTable> {
    let z = centered_values(series)?;
    let n = z.len();
    if lag_max == 0 || lag_max >= n {
        return Err(Error::InvalidConfig(format!(
            "lag_max must satisfy 1 <= lag_max < n = {n}, got {lag_max}"
        )));
    }

    let mut c = vec![0.0; lag_max + 1];
    for (k, ck) in c.iter_mut().enumerate() {
        let mut s = 0.0;
        for t in k..n {
            s += z[t] * z[t - k];
        }
        *ck = s / n as f64;
    }
    if c[0] <= 0.0 {
        return Err(Error::DegenerateSeries(0));
    }

    let mut estimates = Vec::with_capacity(lag_max);
    let mut residual_variance = vec![c[0]];
    let mut coeffs: Vec<f64> = Vec::new();
    let mut err = c[0];
    for k in 1..=lag_max {
        let mut acc = c[k];
        for (j, &aj) in coeffs.iter().enumerate() {
            acc -= aj * c[k - 1 - j];
        }
        if err <= 0.0 {
            return Err(Error::DegenerateSeries(k));
        }
        let rc = acc / err;
        let mut next = Vec::with_capacity(k);
        for j in 0..k - 1 {
            next.push(coeffs[j] - rc * coeffs[k - 2 - j]);
        }
        next.push(rc);
        coeffs = next;
        err *= 1.0 - rc * rc;
        estimates.push(rc);
        residual_variance.push(err);
    }

    Ok(PacfTable {
        method: PacfMethod::YuleWalker,
        n,
        estimates,
        residual_variance,
        stderr: None,
    })
}

/// Standard errors of estimated partial autocorrelations, evaluated at the
/// fitted full AR(K) model: `sqrt((I_zeta^-1)_kk / n)` with the information
/// matrix taken at the estimates themselves.
pub fn pacf_stderr(estimates: &[f64], n: usize) -> Result<Vec<f64>> {
    let k = estimates.len();
    let spec = SubsetSpec::full(k)?;
    let zeta = ZetaVector::new(spec, estimates.to_vec())?;
    crate::inference::zeta_stderr(&zeta, n)
}

/// Default maximum lag for identification plots: `min(n/4, 40)`.
pub fn default_lag_max(n: usize) -> usize {
    (n / 4).clamp(1, 40)
}

fn centered_values(series: &TimeSeries) -> Result<Vec<f64>> {
    if series.is_centered() {
        Ok(series.values().to_vec())
    } else {
        Ok(series.centered().values().to_vec())
    }
}
