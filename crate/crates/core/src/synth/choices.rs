//! Outcomes simulated from a known grouped random-parameters logit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal as NormalDist, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logit::{mnl_probabilities, ChoiceDataset, ModelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum CovariateDist {
    Normal { mean: f64, sd: f64 },
    Bernoulli { p: f64 },
    Uniform { low: f64, high: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateSpec {
    pub name: String,
    #[serde(flatten)]
    pub dist: CovariateDist,
    /// Drawn once per group instead of per observation.
    #[serde(default)]
    pub per_group: bool,
}

/// A data-generating process: model, true parameter vector (in the spec's
/// layout) and covariate distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTruth {
    pub spec: ModelSpec,
    pub params: Vec<f64>,
    pub groups: usize,
    pub obs_per_group: usize,
    pub covariates: Vec<CovariateSpec>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedChoices {
    pub dataset: ChoiceDataset,
    /// The group's standard-normal draw.
    pub omega: Vec<Vec<f64>>,
    /// Realized coefficients of every term, per observation.
    pub coefficients: Vec<Vec<f64>>,
}

impl CovariateDist {
    fn sample<R: Rng>(&self, rng: &mut R) -> Result<f64> {
        Ok(match *self {
            CovariateDist::Normal { mean, sd } => NormalDist::new(mean, sd)
                .map_err(|e| Error::Config(format!("covariate distribution: {e}")))?
                .sample(rng),
            CovariateDist::Bernoulli { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Config(format!("Bernoulli p = {p} outside [0, 1]")));
                }
                f64::from(u8::from(rng.random_bool(p)))
            }
            CovariateDist::Uniform { low, high } => {
                if low.is_nan() || high.is_nan() || low >= high {
                    return Err(Error::Config(format!(
                        "empty uniform range [{low}, {high})"
                    )));
                }
                rng.random_range(low..high)
            }
        })
    }
}

/// Draws covariates, one `ω` per group, realizes coefficients and samples an
/// outcome per observation. Deterministic for a given seed.
pub fn simulate_choices(truth: &SimulationTruth) -> Result<SimulatedChoices> {
    let layout = truth.spec.layout()?;
    let params = layout.unpack(&truth.params, &truth.spec)?;
    let names: Vec<String> = truth.covariates.iter().map(|c| c.name.clone()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(truth.seed);
    let k = layout.n_random();
    let width = (truth.groups.max(1) - 1).to_string().len();
    let col = |name: &str| names.iter().position(|n| n == name);

    let mut rows = Vec::new();
    let mut outcomes = Vec::new();
    let mut labels = Vec::new();
    let mut omegas = Vec::with_capacity(truth.groups);
    let mut coefficients = Vec::new();
    for g in 0..truth.groups {
        let omega: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
        let group_values = truth
            .covariates
            .iter()
            .map(|c| c.dist.sample(&mut rng))
            .collect::<Result<Vec<_>>>()?;
        for _ in 0..truth.obs_per_group {
            let mut row = Vec::with_capacity(names.len());
            for (c, &gv) in truth.covariates.iter().zip(&group_values) {
                row.push(if c.per_group {
                    gv
                } else {
                    c.dist.sample(&mut rng)?
                });
            }
            let value = |name: &str| -> Result<f64> {
                if name == crate::logit::CONSTANT {
                    return Ok(1.0);
                }
                col(name).map(|j| row[j]).ok_or_else(|| {
                    Error::InvalidSpec(format!("no distribution for covariate '{name}'"))
                })
            };
            let z = layout
                .slot_term
                .iter()
                .map(|&t| {
                    truth.spec.terms[t]
                        .heterogeneity
                        .iter()
                        .map(|h| value(h))
                        .collect()
                })
                .collect::<Result<Vec<Vec<f64>>>>()?;
            let beta = params.realize_coefficients(&z, &omega)?;
            let mut v = [0.0; 3];
            for (t, term) in truth.spec.terms.iter().enumerate() {
                v[layout.term_alt[t]] += beta[t] * value(&term.variable)?;
            }
            let p = mnl_probabilities(&v)?;
            let u: f64 = rng.random();
            let y = if u < p[0] {
                0
            } else if u < p[0] + p[1] {
                1
            } else {
                2
            };
            rows.push(row);
            outcomes.push(y);
            labels.push(format!("g{g:0width$}"));
            coefficients.push(beta);
        }
        omegas.push(omega);
    }
    Ok(SimulatedChoices {
        dataset: ChoiceDataset::new(names, rows, outcomes, labels)?,
        omega: omegas,
        coefficients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constants(slight: f64, severe: f64, groups: usize) -> SimulationTruth {
        SimulationTruth {
            spec: ModelSpec::from_toml_str(
                "[[terms]]\nalternative = \"slight\"\nvariable = \"constant\"\n\
                 [[terms]]\nalternative = \"severe\"\nvariable = \"constant\"\n",
            )
            .unwrap(),
            params: vec![slight, severe],
            groups,
            obs_per_group: 10,
            covariates: vec![],
            seed: 3,
        }
    }

    #[test]
    fn zero_utilities_give_uniform_shares() {
        let sim = simulate_choices(&constants(0.0, 0.0, 3000)).unwrap();
        for c in sim.dataset.outcome_counts() {
            let share = c as f64 / 30000.0;
            assert!((share - 1.0 / 3.0).abs() < 0.01, "{share}");
        }
    }

    #[test]
    fn dominant_constant() {
        let sim = simulate_choices(&constants(0.0, 10.0, 100)).unwrap();
        assert!(sim.dataset.outcome_counts()[2] as f64 >= 0.99 * 1000.0);
    }

    #[test]
    fn reproducible() {
        let a = simulate_choices(&constants(0.3, -0.2, 50)).unwrap();
        let b = simulate_choices(&constants(0.3, -0.2, 50)).unwrap();
        assert_eq!(a.dataset, b.dataset);
    }

    #[test]
    fn realized_correlation_matches_cholesky() {
        let spec = ModelSpec::from_toml_str(
            "[[terms]]\nalternative = \"slight\"\nvariable = \"x\"\nrandom = true\n\
             [[terms]]\nalternative = \"severe\"\nvariable = \"x\"\nrandom = true\n\
             [correlation]\nfull = true\n",
        )
        .unwrap();
        // Γ = [[1, 0], [-0.9, √0.19]] gives unit spreads and correlation −0.9.
        let truth = SimulationTruth {
            spec,
            params: vec![0.5, -0.5, 1.0, -0.9, 0.19f64.sqrt()],
            groups: 10_000,
            obs_per_group: 1,
            covariates: vec![CovariateSpec {
                name: "x".into(),
                dist: CovariateDist::Normal { mean: 0.0, sd: 1.0 },
                per_group: false,
            }],
            seed: 11,
        };
        let sim = simulate_choices(&truth).unwrap();
        let (a, b): (Vec<f64>, Vec<f64>) = sim.coefficients.iter().map(|c| (c[0], c[1])).unzip();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (ma, mb) = (mean(&a), mean(&b));
        let cov = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - ma) * (y - mb))
            .sum::<f64>();
        let va = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>();
        let vb = b.iter().map(|y| (y - mb).powi(2)).sum::<f64>();
        let corr = cov / (va * vb).sqrt();
        assert!((corr - -0.9).abs() < 0.05, "{corr}");
        assert!((ma - 0.5).abs() < 0.05 && (mb + 0.5).abs() < 0.05);
    }
}
