//! Panel simulated log-likelihood and its analytic gradient.

use rayon::prelude::*;

use super::data::ChoiceDataset;
use super::halton::Draws;
use super::spec::{Layout, ModelSpec, ParamKind, Parameters};
use crate::error::{Error, Result};

const J: usize = 3;

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Softmax over alternative utilities, the reference alternative first.
pub fn mnl_probabilities(utilities: &[f64]) -> Result<Vec<f64>> {
    if let Some(i) = utilities.iter().position(|u| !u.is_finite()) {
        return Err(Error::NonFiniteUtility { observation: i });
    }
    let lse = log_sum_exp(utilities);
    Ok(utilities.iter().map(|u| (u - lse).exp()).collect())
}

/// A model bound to a dataset and a fixed set of draws.
#[derive(Debug, Clone)]
pub struct SimulatedLikelihood<'a> {
    pub spec: &'a ModelSpec,
    pub layout: Layout,
    pub draws: &'a Draws,
    outcomes: &'a [usize],
    members: Vec<Vec<usize>>,
    /// `n × T` term covariates.
    x: Vec<f64>,
    /// Per random slot, `n × H` heterogeneity covariates.
    z: Vec<Vec<f64>>,
    n_terms: usize,
}

impl<'a> SimulatedLikelihood<'a> {
    pub fn new(data: &'a ChoiceDataset, spec: &'a ModelSpec, draws: &'a Draws) -> Result<Self> {
        let layout = spec.layout()?;
        spec.check_variables(data)?;
        if draws.dims != layout.n_random() {
            return Err(Error::dim("draw dimensions", layout.n_random(), draws.dims));
        }
        if draws.groups != data.n_groups() {
            return Err(Error::dim("draw groups", data.n_groups(), draws.groups));
        }
        let n = data.len();
        let t = spec.terms.len();
        let cols = spec
            .terms
            .iter()
            .map(|term| data.column(&term.variable))
            .collect::<Result<Vec<_>>>()?;
        let mut x = vec![0.0; n * t];
        for (j, c) in cols.iter().enumerate() {
            for i in 0..n {
                x[i * t + j] = c[i];
            }
        }
        let z = layout
            .slot_term
            .iter()
            .map(|&ti| {
                let het = &spec.terms[ti].heterogeneity;
                let cols = het
                    .iter()
                    .map(|v| data.column(v))
                    .collect::<Result<Vec<_>>>()?;
                let h = het.len();
                let mut out = vec![0.0; n * h];
                for (k, c) in cols.iter().enumerate() {
                    for i in 0..n {
                        out[i * h + k] = c[i];
                    }
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spec,
            layout,
            draws,
            outcomes: &data.outcomes,
            members: data.group_members(),
            x,
            z,
            n_terms: t,
        })
    }

    pub fn n_params(&self) -> usize {
        self.layout.len()
    }

    pub fn unpack(&self, theta: &[f64]) -> Result<Parameters> {
        self.layout.unpack(theta, self.spec)
    }

    pub fn loglik(&self, theta: &[f64]) -> Result<f64> {
        Ok(self.evaluate(theta, false)?.0)
    }

    pub fn loglik_and_gradient(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.evaluate(theta, true)
    }

    fn evaluate(&self, theta: &[f64], want_grad: bool) -> Result<(f64, Vec<f64>)> {
        let params = self.unpack(theta)?;
        let parts: Vec<Result<(f64, Vec<f64>)>> = (0..self.members.len())
            .into_par_iter()
            .map(|g| self.group_term(g, &params, theta, want_grad))
            .collect();
        let mut ll = 0.0;
        let mut grad = vec![0.0; if want_grad { theta.len() } else { 0 }];
        for part in parts {
            let (l, gr) = part?;
            ll += l;
            for (a, b) in grad.iter_mut().zip(&gr) {
                *a += b;
            }
        }
        Ok((ll, grad))
    }

    /// Log of the simulated probability of one group's outcome sequence.
    fn group_term(
        &self,
        g: usize,
        p: &Parameters,
        theta: &[f64],
        want_grad: bool,
    ) -> Result<(f64, Vec<f64>)> {
        let t = self.n_terms;
        let k = self.layout.n_random();
        let members = &self.members[g];
        let r_count = self.draws.count;
        let alt = &self.layout.term_alt;
        let slot = &self.layout.term_slot;
        let n_het: Vec<usize> = p.theta.iter().map(Vec::len).collect();
        let het_offset: Vec<usize> = n_het
            .iter()
            .scan(0, |acc, &h| {
                let o = *acc;
                *acc += h;
                Some(o)
            })
            .collect();
        let n_theta: usize = n_het.iter().sum();

        // Draw-independent part of each coefficient.
        let mut base = vec![0.0; members.len() * t];
        for (m, &i) in members.iter().enumerate() {
            for tt in 0..t {
                let mut b = p.means[tt];
                if let Some(s) = slot[tt] {
                    let h = n_het[s];
                    let zi = &self.z[s][i * h..(i + 1) * h];
                    b += p.theta[s].iter().zip(zi).map(|(a, z)| a * z).sum::<f64>();
                }
                base[m * t + tt] = b;
            }
        }

        let mut log_l = vec![0.0; r_count];
        let mut gsum = if want_grad {
            vec![0.0; r_count * t]
        } else {
            Vec::new()
        };
        let mut hz = if want_grad {
            vec![0.0; r_count * n_theta]
        } else {
            Vec::new()
        };
        let mut shift = vec![0.0; k];
        let mut v = [0.0; J];
        for r in 0..r_count {
            let omega = self.draws.get(g, r);
            for (pp, s) in shift.iter_mut().enumerate() {
                *s = (0..=pp).map(|q| p.gamma[(pp, q)] * omega[q]).sum();
            }
            let mut lr = 0.0;
            for (m, &i) in members.iter().enumerate() {
                let xi = &self.x[i * t..(i + 1) * t];
                v.fill(0.0);
                for tt in 0..t {
                    let beta = base[m * t + tt] + slot[tt].map_or(0.0, |s| shift[s]);
                    v[alt[tt]] += beta * xi[tt];
                }
                if v.iter().any(|u| !u.is_finite()) {
                    return Err(Error::NonFiniteUtility { observation: i });
                }
                let lse = log_sum_exp(&v);
                let y = self.outcomes[i];
                lr += v[y] - lse;
                if want_grad {
                    for tt in 0..t {
                        let a = alt[tt];
                        let gi = xi[tt] * (f64::from(u8::from(y == a)) - (v[a] - lse).exp());
                        gsum[r * t + tt] += gi;
                        if let Some(s) = slot[tt] {
                            let h = n_het[s];
                            let zi = &self.z[s][i * h..(i + 1) * h];
                            let off = r * n_theta + het_offset[s];
                            for (kk, zv) in zi.iter().enumerate() {
                                hz[off + kk] += gi * zv;
                            }
                        }
                    }
                }
            }
            log_l[r] = lr;
        }

        let lse = log_sum_exp(&log_l);
        let ll = lse - (r_count as f64).ln();
        if !want_grad {
            return Ok((ll, Vec::new()));
        }
        let w: Vec<f64> = log_l.iter().map(|l| (l - lse).exp()).collect();
        let mut grad = vec![0.0; theta.len()];
        for (idx, kind) in self.layout.kinds.iter().enumerate() {
            grad[idx] = match *kind {
                ParamKind::Mean { term } => (0..r_count).map(|r| w[r] * gsum[r * t + term]).sum(),
                ParamKind::Theta { slot: s, var } => {
                    let off = het_offset[s] + var;
                    (0..r_count).map(|r| w[r] * hz[r * n_theta + off]).sum()
                }
                ParamKind::Cholesky { row, col } => {
                    let term = self.layout.slot_term[row];
                    let d: f64 = (0..r_count)
                        .map(|r| w[r] * self.draws.get(g, r)[col] * gsum[r * t + term])
                        .sum();
                    if row == col {
                        d * sign(theta[idx])
                    } else {
                        d
                    }
                }
            };
        }
        Ok((ll, grad))
    }
}

/// Derivative of |x|, taking the right derivative at zero: the optimizer keeps
/// diagonal entries at or above zero.
fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Σ over groups of ln((1/R) Σ_r Π_{i∈g} P(y_i | β_r)).
pub fn simulated_loglik(
    data: &ChoiceDataset,
    spec: &ModelSpec,
    theta: &[f64],
    draws: &Draws,
) -> Result<f64> {
    SimulatedLikelihood::new(data, spec, draws)?.loglik(theta)
}

/// Log-likelihood with every utility zero.
pub fn null_loglik(n_obs: usize) -> f64 {
    -(n_obs as f64) * (J as f64).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logit::halton::HaltonConfig;

    #[test]
    fn uniform_probabilities() {
        let p = mnl_probabilities(&[0.0, 0.0, 0.0]).unwrap();
        assert!(p.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn closed_form_probabilities() {
        let p = mnl_probabilities(&[0.0, 2f64.ln(), 0.0]).unwrap();
        for (a, b) in p.iter().zip([0.25, 0.5, 0.25]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn shift_invariance() {
        let a = mnl_probabilities(&[0.3, -1.2, 2.0]).unwrap();
        let b = mnl_probabilities(&[100.3, 98.8, 102.0]).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn non_finite_utility() {
        assert!(matches!(
            mnl_probabilities(&[0.0, f64::NAN, 1.0]),
            Err(Error::NonFiniteUtility { observation: 1 })
        ));
    }

    fn spec(random: bool) -> ModelSpec {
        ModelSpec::from_toml_str(&format!(
            "[[terms]]\nalternative = \"slight\"\nvariable = \"constant\"\n\
             [[terms]]\nalternative = \"severe\"\nvariable = \"v\"\nrandom = {random}\n"
        ))
        .unwrap()
    }

    fn data(n: usize, groups: usize) -> ChoiceDataset {
        ChoiceDataset::new(
            vec!["v".into()],
            (0..n)
                .map(|i| vec![(i as f64 * 0.37).sin() * 2.0])
                .collect(),
            (0..n).map(|i| (i * 7 + i / 3) % 3).collect(),
            (0..n).map(|i| format!("g{}", i % groups)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn zero_parameters_give_null_loglik() {
        let d = data(3535, 100);
        let s = spec(true);
        let draws = Draws::halton(
            &HaltonConfig {
                count: 5,
                ..Default::default()
            },
            100,
            1,
        );
        let ll = simulated_loglik(&d, &s, &[0.0; 3], &draws).unwrap();
        assert!((ll - -3883.59).abs() < 0.01);
        assert!((ll - null_loglik(3535)).abs() < 1e-9);
    }

    #[test]
    fn single_observation_collapses_to_mnl() {
        let d = data(1, 1);
        let s = spec(false);
        let draws = Draws::halton(&HaltonConfig::default(), 1, 0);
        let ll = simulated_loglik(&d, &s, &[0.4, -0.7], &draws).unwrap();
        let v = d.x[0];
        let p = mnl_probabilities(&[0.0, 0.4, -0.7 * v]).unwrap();
        assert!((ll - p[d.outcomes[0]].ln()).abs() < 1e-14);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let d = data(60, 12);
        let s = ModelSpec::from_toml_str(
            "[[terms]]\nalternative = \"slight\"\nvariable = \"constant\"\nrandom = true\n\
             [[terms]]\nalternative = \"severe\"\nvariable = \"v\"\nrandom = true\nheterogeneity = [\"v\"]\n\
             [correlation]\nfull = true\n",
        )
        .unwrap();
        let draws = Draws::halton(
            &HaltonConfig {
                count: 50,
                ..Default::default()
            },
            12,
            2,
        );
        let model = SimulatedLikelihood::new(&d, &s, &draws).unwrap();
        let theta = [0.2, -0.4, 0.3, 0.5, -0.3, 0.8];
        let (_, g) = model.loglik_and_gradient(&theta).unwrap();
        for j in 0..theta.len() {
            let h = 1e-5;
            let mut a = theta;
            let mut b = theta;
            a[j] += h;
            b[j] -= h;
            let fd = (model.loglik(&a).unwrap() - model.loglik(&b).unwrap()) / (2.0 * h);
            assert!(
                (fd - g[j]).abs() <= 1e-6 * fd.abs().max(1.0),
                "param {j}: {fd} vs {}",
                g[j]
            );
        }
    }
}
