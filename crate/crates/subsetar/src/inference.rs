//! Large-sample Fisher information machinery: the closed-form AR
//! information matrix, the Jacobian of the partial-autocorrelation
//! expansion as a product of stage Jacobians, and the subset information
//! matrix with its standard errors.

use nalgebra::{Cholesky, DMatrix};

use crate::error::{Error, Result};
use crate::pacf::DurbinLevinsonTable;
use crate::types::{PhiVector, ZetaVector};

/// Condition-number guard for information-matrix inversion. Beyond this the
/// matrix is reported singular rather than pseudo-inverted.
const MAX_CONDITION: f64 = 1e12;

/// Closed-form scaled precision matrix `sigma^2 Gamma_p^{-1}` of a
/// stationary AR(p) process, entry
///
/// ```text
/// M[u,v] = sum_{k=0}^{min(u,v)-1} phi_{u-1-k} phi_{v-1-k}
///                                  - phi_{p-u+k+1} phi_{p-v+k+1}
/// ```
///
/// with `phi_0 = -1` and any other out-of-range index contributing zero.
/// This index reading reproduces the classical AR(1)/AR(2) precision
/// matrices and is pinned crate-wide to the Yule-Walker covariance oracle
/// used in the test suite.
pub fn ar_precision(phi: &[f64]) -> DMatrix<f64> {
    let p = phi.len();
    let coef = |m: i64| -> f64 {
        if m == 0 {
            -1.0
        } else if m >= 1 && m <= p as i64 {
            phi[(m - 1) as usize]
        } else {
            0.0
        }
    };
    let mut out = DMatrix::zeros(p, p);
    for u in 1..=p {
        for v in u..=p {
            let mut s = 0.0;
            for k in 0..u.min(v) {
                let (u, v, k, p) = (u as i64, v as i64, k as i64, p as i64);
                s += coef(u - 1 - k) * coef(v - 1 - k) - coef(p - u + k + 1) * coef(p - v + k + 1);
            }
            out[(u - 1, v - 1)] = s;
            out[(v - 1, u - 1)] = s;
        }
    }
    out
}

/// Fisher information per observation of the AR coefficients in the
/// unrestricted AR(p) model, `I_phi = Gamma_p / sigma^2`, obtained by
/// inverting the polynomial closed form of [`ar_precision`].
///
/// Fails with [`Error::NonStationary`] when the precision matrix is not
/// positive definite, which happens exactly when `phi` leaves the
/// stationary region.
pub fn siddiqui_information(phi: &PhiVector) -> Result<DMatrix<f64>> {
    let precision = ar_precision(phi.values());
    let chol = Cholesky::new(precision).ok_or(Error::NonStationary)?;
    Ok(chol.inverse())
}

/// Jacobian of the full expansion `(zeta_1..zeta_p) -> (phi_1..phi_p)` as
/// the product of the stage Jacobians of the Durbin-Levinson recursion.
///
/// Stage `k` (for `k = 1..p-1`) acts on the state holding the order-`k`
/// coefficients in positions `1..=k` and the unconsumed partial
/// autocorrelations above; its Jacobian has an identity block, an
/// anti-diagonal band `-zeta_{k+1}` over the first `k` positions (with
/// `1 - zeta_{k+1}` where the band meets the diagonal) and a single extra
/// column `-(phi_{k,k}, phi_{k-1,k}, .., phi_{1,k})` in position `k+1`.
/// The product is accumulated with O(p) row operations per stage.
pub fn jacobian_full(full_zeta: &[f64]) -> DMatrix<f64> {
    let p = full_zeta.len();
    let mut jac = DMatrix::identity(p, p);
    if p <= 1 {
        return jac;
    }
    let table = DurbinLevinsonTable::from_zeta(full_zeta);
    for k in 1..p {
        let zk1 = full_zeta[k];
        let coefs = table.row(k);
        // Snapshot the first k rows; each new row mixes old rows.
        let old: Vec<Vec<f64>> = (0..=k)
            .map(|r| jac.row(r).iter().copied().collect())
            .collect();
        for j in 1..=k {
            let partner = k + 1 - j; // anti-diagonal partner of row j
            let phi_jk = coefs[k - j]; // phi_{k+1-j, k}
            for c in 0..p {
                jac[(j - 1, c)] = old[j - 1][c] - zk1 * old[partner - 1][c] - phi_jk * old[k][c];
            }
        }
    }
    jac
}

/// Columns of the full Jacobian at the active lags: the `p x m` Jacobian of
/// the subset expansion, evaluated with zeros at the inactive lags.
pub fn jacobian_subset(zeta: &ZetaVector) -> DMatrix<f64> {
    let full = jacobian_full(&zeta.full());
    let p = zeta.spec().order();
    let m = zeta.spec().len();
    let mut out = DMatrix::zeros(p, m);
    for (col, &lag) in zeta.spec().lags().iter().enumerate() {
        out.set_column(col, &full.column(lag - 1));
    }
    out
}

/// The three matrices of the inference chain for one subset model.
#[derive(Debug, Clone)]
pub struct InformationMatrices {
    /// `p x p` information of the unrestricted AR coefficients.
    pub iphi: DMatrix<f64>,
    /// `p x m` Jacobian of the subset expansion.
    pub jzeta: DMatrix<f64>,
    /// `m x m` information of the subset parameters, `J' I_phi J`.
    pub izeta: DMatrix<f64>,
}

/// Computes `I_phi`, the subset Jacobian and `I_zeta = J' I_phi J`.
pub fn information_matrices(zeta: &ZetaVector) -> Result<InformationMatrices> {
    let phi = crate::pacf::zeta_to_phi(zeta);
    let iphi = siddiqui_information(&phi)?;
    let jzeta = jacobian_subset(zeta);
    let izeta = {
        let raw = jzeta.transpose() * &iphi * &jzeta;
        // enforce exact symmetry lost to rounding
        (&raw + raw.transpose()) * 0.5
    };
    Ok(InformationMatrices { iphi, jzeta, izeta })
}

/// Information matrix of the subset parameters.
pub fn zeta_information(zeta: &ZetaVector) -> Result<DMatrix<f64>> {
    Ok(information_matrices(zeta)?.izeta)
}

/// Per-parameter standard errors `sqrt((I_zeta^-1)_kk / n)`.
pub fn zeta_stderr(zeta: &ZetaVector, n: usize) -> Result<Vec<f64>> {
    let izeta = zeta_information(zeta)?;
    let inv = invert_spd(&izeta, zeta.spec().lags())?;
    Ok((0..inv.nrows())
        .map(|k| (inv[(k, k)] / n as f64).sqrt())
        .collect())
}

/// Inverts a symmetric positive-definite matrix, refusing (rather than
/// pseudo-inverting) when the Cholesky factor indicates a condition number
/// beyond [`MAX_CONDITION`].
pub(crate) fn invert_spd(a: &DMatrix<f64>, lags: &[usize]) -> Result<DMatrix<f64>> {
    let singular = || Error::SingularInformation {
        lags: lags.to_vec(),
    };
    let chol = Cholesky::new(a.clone()).ok_or_else(singular)?;
    let diag = chol.l_dirty().diagonal();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for &d in diag.iter() {
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if lo <= 0.0 || lo.is_nan() || (hi / lo).powi(2) > MAX_CONDITION {
        return Err(singular());
    }
    Ok(chol.inverse())
}
