//! Derived quantities of a fitted model: spreads, correlations and fit statistics.

use log::warn;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Standard deviations of correlated random coefficients: row norms of Γ.
pub fn sigma_from_cholesky(gamma: &DMatrix<f64>) -> Vec<f64> {
    gamma.row_iter().map(|r| r.norm()).collect()
}

/// `C = ΓΓᵀ`.
pub fn covariance_matrix(gamma: &DMatrix<f64>) -> DMatrix<f64> {
    gamma * gamma.transpose()
}

/// `C_pq / (σ_p σ_q)`.
pub fn correlation_matrix(gamma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sigma = sigma_from_cholesky(gamma);
    if let Some(index) = sigma.iter().position(|&s| s == 0.0) {
        return Err(Error::ZeroSigma { index });
    }
    let c = covariance_matrix(gamma);
    Ok(DMatrix::from_fn(c.nrows(), c.ncols(), |p, q| {
        if p == q {
            1.0
        } else {
            (c[(p, q)] / (sigma[p] * sigma[q])).clamp(-1.0, 1.0)
        }
    }))
}

/// t-statistic of a spread using `SE = S/√N`, where `S` is a sample standard deviation.
pub fn sigma_t_stat(sigma: f64, sample_sd: f64, n: usize) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    sigma / (sample_sd / (n as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrTest {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Likelihood-ratio test of a restricted model against the model nesting it.
/// A negative statistic is reported with a warning and a p-value of 1.
pub fn lr_test(ll_restricted: f64, ll_full: f64, df: usize) -> LrTest {
    let statistic = -2.0 * (ll_restricted - ll_full);
    if statistic < 0.0 {
        warn!("negative likelihood-ratio statistic {statistic:.4}; models may not be nested or the full fit did not converge");
    }
    let p_value = if statistic <= 0.0 || df == 0 {
        1.0
    } else {
        1.0 - ChiSquared::new(df as f64).expect("df > 0").cdf(statistic)
    };
    LrTest {
        statistic,
        df,
        p_value,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitMetrics {
    pub mcfadden_r2: f64,
    pub aic: f64,
    pub df: usize,
    pub n_obs: usize,
}

pub fn fit_metrics(ll: f64, ll0: f64, df: usize, n_obs: usize) -> FitMetrics {
    FitMetrics {
        mcfadden_r2: 1.0 - ll / ll0,
        aic: 2.0 * df as f64 - 2.0 * ll,
        df,
        n_obs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rear_end() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.783, 0.0, -0.672, 0.207])
    }

    fn sideswipe() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.397, 0.0, -0.305, 0.254])
    }

    #[test]
    fn sigma_rows() {
        let s = sigma_from_cholesky(&rear_end());
        assert!((s[0] - 0.783).abs() < 1e-12);
        assert!((s[1] - 0.703).abs() < 5e-4);
        assert!((s[1] - 0.70).abs() < 0.01);
        let s = sigma_from_cholesky(&sideswipe());
        assert!((s[0] - 0.40).abs() < 0.01);
        assert_eq!(sigma_from_cholesky(&DMatrix::identity(3, 3)), vec![1.0; 3]);
    }

    #[test]
    fn correlations() {
        let c = correlation_matrix(&rear_end()).unwrap();
        assert!((c[(1, 0)] - -0.96).abs() < 0.005);
        assert_eq!(c[(0, 1)], c[(1, 0)]);
        let c = correlation_matrix(&sideswipe()).unwrap();
        assert!((c[(1, 0)] - -0.77).abs() < 0.005);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, 2.0]));
        assert_eq!(correlation_matrix(&d).unwrap(), DMatrix::identity(2, 2));
    }

    #[test]
    fn zero_sigma() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            correlation_matrix(&g),
            Err(Error::ZeroSigma { index: 1 })
        ));
    }

    #[test]
    fn sigma_t() {
        assert!((sigma_t_stat(0.7, 0.7, 49) - 7.0).abs() < 1e-12);
        assert_eq!(sigma_t_stat(0.0, 0.7, 49), 0.0);
        let ratio = sigma_t_stat(0.3, 1.1, 400) / sigma_t_stat(0.3, 1.1, 100);
        assert!((ratio - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lr_statistics() {
        assert!((lr_test(-1590.06, -1577.45, 1).statistic - 25.22).abs() < 1e-9);
        assert!((lr_test(-1162.69, -1157.31, 1).statistic - 10.76).abs() < 1e-9);
        let same = lr_test(-10.0, -10.0, 2);
        assert_eq!((same.statistic, same.p_value), (0.0, 1.0));
        assert!(lr_test(-1590.06, -1577.45, 1).p_value < 0.01);
        assert!((lr_test(0.0, 3.841458820694124 / 2.0, 1).p_value - 0.05).abs() < 1e-9);
    }

    #[test]
    fn fit_statistics() {
        assert!((fit_metrics(-1577.45, -3883.59, 27, 3535).mcfadden_r2 - 0.594).abs() < 5e-4);
        assert!((fit_metrics(-1157.31, -1556.73, 1, 1).mcfadden_r2 - 0.257).abs() < 5e-4);
        assert_eq!(fit_metrics(-5.0, -5.0, 0, 1).mcfadden_r2, 0.0);
        assert!((fit_metrics(-1577.45, -3883.59, 27, 3535).aic - 3208.9).abs() < 1e-9);
    }
}
