//! Likelihood-ratio tests and AIC between uncorrelated and correlated models,
//! from published fit statistics.
//!
//!     cargo run --example model_comparison

use conflict_risk::report::{compare_models, render_comparison, ModelSummary, StoredResult};

fn stored(name: &str, ll: f64, df: usize, ll0: f64, n: usize, aic: f64) -> ModelSummary {
    ModelSummary::from_stored(&StoredResult {
        name: name.into(),
        ll,
        df,
        ll0: Some(ll0),
        n_obs: Some(n),
        reported_aic: Some(aic),
        reported_r2: None,
    })
}

fn main() {
    let comparisons = [
        compare_models(
            "Rear-end",
            stored("uncorrelated", -1590.06, 26, -3883.59, 3535, 3232.1),
            stored("correlated", -1577.45, 27, -3883.59, 3535, 3210.9),
        ),
        compare_models(
            "Sideswipe",
            stored("uncorrelated", -1162.69, 21, -1556.73, 1417, 2367.0),
            stored("correlated", -1157.31, 22, -1556.73, 1417, 2359.0),
        ),
    ];
    print!("{}", render_comparison(&comparisons));
}
