//! Simulated maximum likelihood estimation.

use log::{info, warn};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::data::{ChoiceDataset, CONSTANT};
use super::diagnostics::{
    correlation_matrix, covariance_matrix, fit_metrics, sigma_from_cholesky, sigma_t_stat,
};
use super::halton::{Draws, HaltonConfig};
use super::likelihood::{null_loglik, SimulatedLikelihood};
use super::optim::{minimize, minimize_bounded, BfgsOptions};
use super::spec::{ModelSpec, ParamKind, Term};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationOptions {
    pub optimizer: BfgsOptions,
    /// Starting values; by default means come from a fixed-coefficient fit,
    /// Cholesky diagonals start at 0.1 and everything else at 0.
    pub start: Option<Vec<f64>>,
    /// Parameter indices held at their starting values.
    pub hold: Vec<usize>,
    pub standard_errors: bool,
    /// Relative step of the numerical Hessian.
    pub hessian_step: f64,
    /// Per random term, the `S` used for spread t-statistics. Defaults to the
    /// sample standard deviation of the term's covariate.
    pub sigma_sample_sd: Option<Vec<f64>>,
}

impl Default for EstimationOptions {
    fn default() -> Self {
        Self {
            optimizer: BfgsOptions::default(),
            start: None,
            hold: Vec::new(),
            standard_errors: true,
            hessian_step: 1e-5,
            sigma_sample_sd: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub name: String,
    pub kind: ParamKind,
    /// Reported value; Cholesky diagonals are non-negative.
    pub value: f64,
    pub se: Option<f64>,
    pub t_stat: Option<f64>,
    pub held: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomTerm {
    pub name: String,
    pub sigma: f64,
    pub sample_sd: f64,
    pub sigma_t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub iterations: usize,
    pub grad_norm: f64,
    pub rel_change: f64,
    /// Accepted because the line search stalled near the optimum.
    pub stalled: bool,
    pub hessian_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub model: String,
    pub spec: ModelSpec,
    pub estimates: Vec<Estimate>,
    /// Raw optimizer vector, usable as a start.
    pub theta: Vec<f64>,
    pub ll: f64,
    pub ll0: f64,
    pub n_obs: usize,
    pub n_groups: usize,
    /// Number of estimated (not held) parameters.
    pub df: usize,
    pub mcfadden_r2: f64,
    pub aic: f64,
    pub counts: [usize; 3],
    pub random_terms: Vec<RandomTerm>,
    pub cholesky: Vec<Vec<f64>>,
    pub covariance: Vec<Vec<f64>>,
    /// Absent when a spread is zero.
    pub correlation: Option<Vec<Vec<f64>>>,
    pub draws: HaltonConfig,
    pub convergence: ConvergenceReport,
    pub warnings: Vec<String>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Fails with `Unidentified` when the columns entering one alternative's utility
/// are (numerically) collinear.
pub fn check_identifiable(data: &ChoiceDataset, spec: &ModelSpec) -> Result<()> {
    let layout = spec.layout()?;
    let n = data.len();
    for alt in 1..3 {
        let mut names = Vec::new();
        let mut cols: Vec<Vec<f64>> = Vec::new();
        for (i, t) in spec.terms.iter().enumerate() {
            if layout.term_alt[i] != alt {
                continue;
            }
            let x = data.column(&t.variable)?;
            for h in &t.heterogeneity {
                let z = data.column(h)?;
                names.push(format!("{}|{h}", t.name()));
                cols.push(x.iter().zip(&z).map(|(a, b)| a * b).collect());
            }
            names.push(t.name());
            cols.push(x);
        }
        if cols.is_empty() {
            continue;
        }
        if let Some(k) = cols.iter().position(|c| c.iter().all(|&v| v == 0.0)) {
            return Err(Error::Unidentified(format!(
                "{} is zero for every observation",
                names[k]
            )));
        }
        let m = DMatrix::from_fn(n, cols.len(), |i, j| {
            let norm = cols[j].iter().map(|v| v * v).sum::<f64>().sqrt();
            cols[j][i] / norm
        });
        let sv = m.singular_values();
        let max = sv.max();
        let min = sv.min();
        if cols.len() > n || min <= 1e-10 * max {
            return Err(Error::Unidentified(format!(
                "collinear covariates in the {} utility: {}",
                super::data::ALTERNATIVES[alt],
                names.join(", ")
            )));
        }
    }
    Ok(())
}

/// The same terms with every random coefficient made fixed. Zero-mean terms are dropped.
fn fixed_counterpart(spec: &ModelSpec) -> ModelSpec {
    ModelSpec {
        name: format!("{} (fixed)", spec.name),
        terms: spec
            .terms
            .iter()
            .filter(|t| !t.zero_mean)
            .map(|t| Term {
                random: false,
                heterogeneity: Vec::new(),
                ..t.clone()
            })
            .collect(),
        correlation: Default::default(),
        draws: spec.draws.clone(),
    }
}

/// Default start: fixed-coefficient fit for the means, 0.1 on the Cholesky diagonal.
pub fn default_start(data: &ChoiceDataset, spec: &ModelSpec) -> Result<Vec<f64>> {
    let layout = spec.layout()?;
    let mut start: Vec<f64> = layout
        .kinds
        .iter()
        .map(|k| match k {
            ParamKind::Cholesky { row, col } if row == col => 0.1,
            _ => 0.0,
        })
        .collect();
    if layout.n_random() == 0 {
        return Ok(start);
    }
    let fixed = fixed_counterpart(spec);
    let draws = Draws::halton(&fixed.draws, data.n_groups(), 0);
    let model = SimulatedLikelihood::new(data, &fixed, &draws)?;
    let fit = minimize(
        |x| {
            model
                .loglik_and_gradient(x)
                .map(|(l, g)| (-l, g.iter().map(|v| -v).collect()))
        },
        &vec![0.0; model.n_params()],
        &BfgsOptions::default(),
    )?;
    for (idx, kind) in layout.kinds.iter().enumerate() {
        if let ParamKind::Mean { term } = *kind {
            let name = spec.terms[term].name();
            if let Some(j) = fixed.terms.iter().position(|t| t.name() == name) {
                start[idx] = fit.x[j];
            }
        }
    }
    Ok(start)
}

/// Central-difference Hessian of the log-likelihood over the free parameters.
fn numerical_hessian(
    model: &SimulatedLikelihood,
    theta: &[f64],
    free: &[usize],
    rel_step: f64,
) -> Result<DMatrix<f64>> {
    let k = free.len();
    let mut h = DMatrix::zeros(k, k);
    for (a, &i) in free.iter().enumerate() {
        let step = rel_step * theta[i].abs().max(1.0);
        let mut up = theta.to_vec();
        let mut down = theta.to_vec();
        up[i] += step;
        down[i] -= step;
        let (_, gu) = model.loglik_and_gradient(&up)?;
        let (_, gd) = model.loglik_and_gradient(&down)?;
        for (b, &j) in free.iter().enumerate() {
            h[(b, a)] = (gu[j] - gd[j]) / (2.0 * step);
        }
    }
    Ok((&h + h.transpose()) * 0.5)
}

/// Maximizes the simulated log-likelihood of `spec` on `data`.
pub fn maximize(
    data: &ChoiceDataset,
    spec: &ModelSpec,
    options: &EstimationOptions,
) -> Result<EstimationResult> {
    if data.is_empty() {
        return Err(Error::Empty("no observations to estimate on".into()));
    }
    let layout = spec.layout()?;
    spec.check_variables(data)?;
    check_identifiable(data, spec)?;
    let mut warnings = Vec::new();
    let counts = data.outcome_counts();
    if let Some(j) = counts.iter().position(|&c| c == 0) {
        let msg = format!(
            "alternative '{}' is never chosen",
            super::data::ALTERNATIVES[j]
        );
        warn!("{msg}");
        warnings.push(msg);
    }

    let start = match &options.start {
        Some(s) if s.len() != layout.len() => {
            return Err(Error::dim("start vector", layout.len(), s.len()))
        }
        Some(s) => s.clone(),
        None => default_start(data, spec)?,
    };
    // Cholesky diagonals enter as |θ|; searching over θ ≥ 0 keeps the kink at
    // zero on the boundary, where it can be recognized as an optimum.
    let is_diag =
        |i: usize| matches!(layout.kinds[i], ParamKind::Cholesky { row, col } if row == col);
    let start: Vec<f64> = start
        .iter()
        .enumerate()
        .map(|(i, &v)| if is_diag(i) { v.abs() } else { v })
        .collect();
    let draws = Draws::halton(&spec.draws, data.n_groups(), layout.n_random());
    let model = SimulatedLikelihood::new(data, spec, &draws)?;
    let free: Vec<usize> = (0..layout.len())
        .filter(|i| !options.hold.contains(i))
        .collect();
    let embed = |x: &[f64]| {
        let mut full = start.clone();
        for (&i, &v) in free.iter().zip(x) {
            full[i] = v;
        }
        full
    };
    info!(
        "estimating '{}': {} parameters, {} observations, {} groups, {} draws",
        spec.name,
        free.len(),
        data.len(),
        data.n_groups(),
        draws.count
    );
    let x0: Vec<f64> = free.iter().map(|&i| start[i]).collect();
    let lower: Vec<f64> = free
        .iter()
        .map(|&i| if is_diag(i) { 0.0 } else { f64::NEG_INFINITY })
        .collect();
    let out = minimize_bounded(
        |x| {
            let (l, g) = model.loglik_and_gradient(&embed(x))?;
            Ok((-l, free.iter().map(|&i| -g[i]).collect()))
        },
        &x0,
        &lower,
        &options.optimizer,
    )?;
    if out.stalled {
        let msg = format!(
            "line search stalled with gradient max-norm {:.2e}; accepted as converged",
            out.grad_norm
        );
        warn!("{msg}");
        warnings.push(msg);
    }
    let theta = embed(&out.x);
    let ll = -out.f;
    for (&i, &v) in free.iter().zip(&out.x) {
        if is_diag(i) && v == 0.0 {
            let msg = format!(
                "{} is estimated at zero; its standard error is not meaningful",
                layout.names[i]
            );
            warn!("{msg}");
            warnings.push(msg);
        }
    }

    let mut se_free: Option<Vec<f64>> = None;
    if options.standard_errors && !free.is_empty() {
        let h = numerical_hessian(&model, &theta, &free, options.hessian_step)?;
        match (-h).cholesky() {
            Some(ch) => {
                let cov = ch.inverse();
                se_free = Some((0..free.len()).map(|i| cov[(i, i)].sqrt()).collect());
            }
            None => {
                let msg = Error::SingularHessian.to_string() + "; standard errors unavailable";
                warn!("{msg}");
                warnings.push(msg);
            }
        }
    }

    let params = model.unpack(&theta)?;
    let estimates = layout
        .kinds
        .iter()
        .enumerate()
        .map(|(i, kind)| {
            let value = match *kind {
                ParamKind::Cholesky { row, col } if row == col => theta[i].abs(),
                _ => theta[i],
            };
            let se = se_free
                .as_ref()
                .and_then(|s| free.iter().position(|&f| f == i).map(|p| s[p]));
            Estimate {
                name: layout.names[i].clone(),
                kind: *kind,
                value,
                se,
                t_stat: se.map(|s| value / s),
                held: options.hold.contains(&i),
            }
        })
        .collect();

    let sigma = sigma_from_cholesky(&params.gamma);
    let sample_sd = match &options.sigma_sample_sd {
        Some(s) if s.len() != sigma.len() => {
            return Err(Error::dim("sigma sample SDs", sigma.len(), s.len()))
        }
        Some(s) => s.clone(),
        None => layout
            .slot_term
            .iter()
            .map(|&t| covariate_sd(data, &spec.terms[t].variable))
            .collect::<Result<_>>()?,
    };
    let random_terms = layout
        .slot_term
        .iter()
        .enumerate()
        .map(|(p, &t)| RandomTerm {
            name: spec.terms[t].name(),
            sigma: sigma[p],
            sample_sd: sample_sd[p],
            sigma_t: (sample_sd[p] > 0.0).then(|| sigma_t_stat(sigma[p], sample_sd[p], data.len())),
        })
        .collect();
    let correlation = match correlation_matrix(&params.gamma) {
        Ok(c) => Some(rows(&c)),
        Err(e) => {
            if layout.n_random() > 0 {
                warnings.push(e.to_string());
            }
            None
        }
    };
    let ll0 = null_loglik(data.len());
    let metrics = fit_metrics(ll, ll0, free.len(), data.len());
    Ok(EstimationResult {
        model: spec.name.clone(),
        spec: spec.clone(),
        estimates,
        theta,
        ll,
        ll0,
        n_obs: data.len(),
        n_groups: data.n_groups(),
        df: free.len(),
        mcfadden_r2: metrics.mcfadden_r2,
        aic: metrics.aic,
        counts,
        random_terms,
        cholesky: rows(&params.gamma),
        covariance: rows(&covariance_matrix(&params.gamma)),
        correlation,
        draws: spec.draws.clone(),
        convergence: ConvergenceReport {
            iterations: out.iterations,
            grad_norm: out.grad_norm,
            rel_change: out.rel_change,
            stalled: out.stalled,
            hessian_ok: se_free.is_some(),
        },
        warnings,
    })
}

/// Sample standard deviation of a covariate; zero for the constant.
fn covariate_sd(data: &ChoiceDataset, name: &str) -> Result<f64> {
    if name == CONSTANT || data.len() < 2 {
        return Ok(0.0);
    }
    let v = DVector::from_vec(data.column(name)?);
    Ok(v.variance().sqrt() * (v.len() as f64 / (v.len() as f64 - 1.0)).sqrt())
}

impl EstimationResult {
    pub fn estimate(&self, name: &str) -> Option<&Estimate> {
        self.estimates.iter().find(|e| e.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset() -> ChoiceDataset {
        let n = 400;
        ChoiceDataset::new(
            vec!["a".into(), "b".into()],
            (0..n)
                .map(|i| vec![(i as f64 * 0.7).sin(), 2.0 * (i as f64 * 0.7).sin()])
                .collect(),
            (0..n).map(|i| (i * 5 + i / 7) % 3).collect(),
            (0..n).map(|i| format!("{}", i / 4)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn collinear_terms_are_unidentified() {
        let spec = ModelSpec::from_toml_str(
            "[[terms]]\nalternative = \"severe\"\nvariable = \"a\"\n\
             [[terms]]\nalternative = \"severe\"\nvariable = \"b\"\n",
        )
        .unwrap();
        assert!(matches!(
            check_identifiable(&dataset(), &spec),
            Err(Error::Unidentified(_))
        ));
        let split = ModelSpec::from_toml_str(
            "[[terms]]\nalternative = \"severe\"\nvariable = \"a\"\n\
             [[terms]]\nalternative = \"slight\"\nvariable = \"b\"\n",
        )
        .unwrap();
        check_identifiable(&dataset(), &split).unwrap();
    }

    #[test]
    fn constants_only_match_shares() {
        let d = dataset();
        let spec = ModelSpec::from_toml_str(
            "[[terms]]\nalternative = \"slight\"\nvariable = \"constant\"\n\
             [[terms]]\nalternative = \"severe\"\nvariable = \"constant\"\n",
        )
        .unwrap();
        let r = maximize(&d, &spec, &EstimationOptions::default()).unwrap();
        let c = d.outcome_counts();
        let expect = [
            (c[1] as f64 / c[0] as f64).ln(),
            (c[2] as f64 / c[0] as f64).ln(),
        ];
        for (e, x) in r.estimates.iter().zip(expect) {
            assert!((e.value - x).abs() < 1e-5);
            assert!(e.se.unwrap() > 0.0);
        }
        assert!(r.ll >= r.ll0);
        assert!((r.aic - (4.0 - 2.0 * r.ll)).abs() < 1e-12);
    }
}
