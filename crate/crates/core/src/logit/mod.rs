//! Multinomial and correlated grouped random-parameters logit models.

mod data;
mod diagnostics;
mod estimate;
mod halton;
mod likelihood;
mod optim;
mod spec;

pub use data::{ChoiceDataset, ALTERNATIVES, CONSTANT};
pub use diagnostics::{
    correlation_matrix, covariance_matrix, fit_metrics, lr_test, sigma_from_cholesky, sigma_t_stat,
    FitMetrics, LrTest,
};
pub use estimate::{
    check_identifiable, default_start, maximize, ConvergenceReport, Estimate, EstimationOptions,
    EstimationResult, RandomTerm,
};
pub use halton::{halton, primes, radical_inverse, Draws, HaltonConfig};
pub use likelihood::{mnl_probabilities, null_loglik, simulated_loglik, SimulatedLikelihood};
pub use optim::{minimize, BfgsOptions, BfgsOutcome};
pub use spec::{CorrelationSpec, Layout, ModelSpec, ParamKind, Parameters, Term};
