//! Side-by-side fit statistics and likelihood-ratio tests of nested models.

use log::warn;
use serde::{Deserialize, Serialize};

use super::config::StoredResult;
use crate::logit::{fit_metrics, lr_test, EstimationResult, LrTest};

/// p-value below which a statistic is starred.
pub const SIGNIFICANCE_LEVEL: f64 = 0.01;

/// A reported AIC further than this from 2·df − 2·LL is flagged.
pub const AIC_TOLERANCE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub name: String,
    pub ll: f64,
    pub df: usize,
    pub ll0: Option<f64>,
    pub n_obs: Option<usize>,
    pub mcfadden_r2: Option<f64>,
    /// 2·df − 2·LL.
    pub aic: f64,
    pub reported_aic: Option<f64>,
    /// False when the reported AIC disagrees with the computed one.
    pub aic_consistent: bool,
}

impl ModelSummary {
    pub fn from_result(r: &EstimationResult) -> Self {
        Self {
            name: r.model.clone(),
            ll: r.ll,
            df: r.df,
            ll0: Some(r.ll0),
            n_obs: Some(r.n_obs),
            mcfadden_r2: Some(r.mcfadden_r2),
            aic: r.aic,
            reported_aic: None,
            aic_consistent: true,
        }
    }

    /// Summary of a stored result. A reported R² is kept only when LL(0) is unknown.
    pub fn from_stored(s: &StoredResult) -> Self {
        let n = s.n_obs.unwrap_or(0);
        let m = fit_metrics(s.ll, s.ll0.unwrap_or(f64::NAN), s.df, n);
        Self {
            name: s.name.clone(),
            ll: s.ll,
            df: s.df,
            ll0: s.ll0,
            n_obs: s.n_obs,
            mcfadden_r2: if s.ll0.is_some() {
                Some(m.mcfadden_r2)
            } else {
                s.reported_r2
            },
            aic: m.aic,
            reported_aic: s.reported_aic,
            aic_consistent: s
                .reported_aic
                .is_none_or(|a| (a - m.aic).abs() <= AIC_TOLERANCE),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub label: String,
    pub restricted: ModelSummary,
    pub full: ModelSummary,
    pub lr: LrTest,
    pub significant: bool,
    pub warnings: Vec<String>,
}

/// Likelihood-ratio comparison of `restricted` against `full`.
pub fn compare_models(label: &str, restricted: ModelSummary, full: ModelSummary) -> Comparison {
    let mut warnings = Vec::new();
    let df = full.df.saturating_sub(restricted.df);
    if df == 0 {
        warnings.push(format!(
            "'{}' does not have more parameters than '{}'; models may not be nested",
            full.name, restricted.name
        ));
    }
    if let (Some(a), Some(b)) = (restricted.n_obs, full.n_obs) {
        if a != b {
            warnings.push(format!(
                "models were fitted on different samples ({a} vs {b} observations)"
            ));
        }
    }
    if full.ll < restricted.ll {
        warnings.push(format!(
            "log-likelihood of '{}' is below that of the restricted '{}'",
            full.name, restricted.name
        ));
    }
    for m in [&restricted, &full] {
        if !m.aic_consistent {
            warnings.push(format!(
                "reported AIC {} of '{}' differs from 2·df − 2·LL = {:.1}",
                m.reported_aic.unwrap_or(f64::NAN),
                m.name,
                m.aic
            ));
        }
    }
    for w in &warnings {
        warn!("{w}");
    }
    let lr = lr_test(restricted.ll, full.ll, df.max(1));
    Comparison {
        label: label.to_string(),
        significant: lr.p_value < SIGNIFICANCE_LEVEL,
        restricted,
        full,
        lr,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stored(name: &str, ll: f64, df: usize, aic: f64) -> ModelSummary {
        ModelSummary::from_stored(&StoredResult {
            name: name.into(),
            ll,
            df,
            ll0: None,
            n_obs: None,
            reported_aic: Some(aic),
            reported_r2: None,
        })
    }

    #[test]
    fn published_fit_table() {
        let rear = compare_models(
            "rear-end",
            stored("uncorrelated", -1590.06, 26, 3232.1),
            stored("correlated", -1577.45, 27, 3210.9),
        );
        assert!((rear.lr.statistic - 25.22).abs() < 1e-9);
        assert!(rear.significant);
        assert!((rear.restricted.aic - 3232.1).abs() < 0.05);
        assert!(rear.restricted.aic_consistent);
        assert!((rear.full.aic - 3208.9).abs() < 1e-9);
        assert!(!rear.full.aic_consistent);
        assert_eq!(rear.warnings.len(), 1);

        let side = compare_models(
            "sideswipe",
            stored("uncorrelated", -1162.69, 21, 2367.0),
            stored("correlated", -1157.31, 22, 2359.0),
        );
        assert!((side.lr.statistic - 10.76).abs() < 1e-9);
        assert!(side.significant);
        assert!((side.restricted.aic - 2367.0).abs() < 0.5);
        assert!((side.full.aic - 2359.0).abs() < 0.5);
        assert!(side.warnings.is_empty());
    }

    #[test]
    fn identical_models() {
        let c = compare_models(
            "x",
            stored("a", -10.0, 2, 24.0),
            stored("b", -10.0, 3, 26.0),
        );
        assert_eq!(c.lr.statistic, 0.0);
        assert!(!c.significant);
    }

    #[test]
    fn worse_full_model_warns() {
        let c = compare_models(
            "x",
            stored("a", -10.0, 2, 24.0),
            stored("b", -11.0, 3, 28.0),
        );
        assert!(c.lr.statistic < 0.0);
        assert!(c.warnings.iter().any(|w| w.contains("below")));
    }
}
