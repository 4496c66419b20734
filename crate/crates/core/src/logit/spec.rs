//! Model specification and the flat parameter layout used by the optimizer.

use std::collections::HashSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::data::{ChoiceDataset, ALTERNATIVES, CONSTANT};
use super::halton::HaltonConfig;
use crate::error::{Error, Result};

/// One coefficient: `variable` entering the utility of `alternative`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    /// `slight` or `severe`; `none` is the reference and carries no terms.
    pub alternative: String,
    /// Covariate name, or `constant`.
    pub variable: String,
    #[serde(default)]
    pub random: bool,
    /// Random coefficient whose mean is fixed at zero; only its spread and
    /// heterogeneity loadings are estimated.
    #[serde(default)]
    pub zero_mean: bool,
    /// Covariates shifting the mean of a random coefficient.
    #[serde(default)]
    pub heterogeneity: Vec<String>,
}

impl Term {
    pub fn name(&self) -> String {
        format!("{}:{}", self.alternative, self.variable)
    }

    fn alternative_index(&self) -> Option<usize> {
        ALTERNATIVES.iter().position(|a| *a == self.alternative)
    }
}

/// Which off-diagonal Cholesky entries are free. Random terms are uncorrelated
/// unless listed together in a block.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSpec {
    /// Every random term correlated with every other.
    #[serde(default)]
    pub full: bool,
    /// Groups of term names (`alternative:variable`) that are mutually correlated.
    #[serde(default)]
    pub blocks: Vec<Vec<String>>,
    /// Pairs constrained to zero even inside a block.
    #[serde(default)]
    pub zero: Vec<[String; 2]>,
}

/// Declarative model layout.
///
/// ```toml
/// [[terms]]
/// alternative = "severe"
/// variable = "lead_avg_speed"
/// random = true
/// heterogeneity = ["zone1"]
///
/// [correlation]
/// blocks = [["severe:lead_avg_speed", "severe:follow_avg_speed"]]
///
/// [draws]
/// count = 1000
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(default)]
    pub name: String,
    pub terms: Vec<Term>,
    #[serde(default)]
    pub correlation: CorrelationSpec,
    #[serde(default)]
    pub draws: HaltonConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamKind {
    /// Mean (or fixed value) of term `term`.
    Mean { term: usize },
    /// Loading of heterogeneity variable `var` on the mean of random slot `slot`.
    Theta { slot: usize, var: usize },
    /// Cholesky entry `(row, col)` of the random block.
    Cholesky { row: usize, col: usize },
}

/// Resolved positions of every free parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub kinds: Vec<ParamKind>,
    pub names: Vec<String>,
    /// Alternative index (1 or 2) of each term.
    pub term_alt: Vec<usize>,
    /// Random slot of each term.
    pub term_slot: Vec<Option<usize>>,
    /// Term of each random slot.
    pub slot_term: Vec<usize>,
    /// Free lower-triangular Cholesky entries.
    pub mask: Vec<Vec<bool>>,
}

/// Structured parameter values.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameters {
    /// Per term; zero for zero-mean terms.
    pub means: Vec<f64>,
    /// Random slot of each term.
    pub random: Vec<Option<usize>>,
    /// Heterogeneity loadings per random slot.
    pub theta: Vec<Vec<f64>>,
    /// Lower-triangular Cholesky factor of the random block, non-negative diagonal.
    pub gamma: DMatrix<f64>,
}

impl Parameters {
    /// Coefficients of every term: fixed ones pass through; random ones become
    /// `mean + Θ·z + (Γω)`. `z` holds the heterogeneity values per random slot.
    pub fn realize_coefficients(&self, z: &[Vec<f64>], omega: &[f64]) -> Result<Vec<f64>> {
        let k = self.gamma.nrows();
        if omega.len() != k {
            return Err(Error::dim("draw vector", k, omega.len()));
        }
        if z.len() != self.theta.len() {
            return Err(Error::dim("heterogeneity slots", self.theta.len(), z.len()));
        }
        for (zs, th) in z.iter().zip(&self.theta) {
            if zs.len() != th.len() {
                return Err(Error::dim("heterogeneity values", th.len(), zs.len()));
            }
        }
        Ok(self
            .means
            .iter()
            .zip(&self.random)
            .map(|(&m, slot)| match *slot {
                None => m,
                Some(p) => {
                    let shift: f64 = self.theta[p].iter().zip(&z[p]).map(|(a, b)| a * b).sum();
                    let mix: f64 = (0..=p).map(|q| self.gamma[(p, q)] * omega[q]).sum();
                    m + shift + mix
                }
            })
            .collect())
    }
}

impl ModelSpec {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let spec: ModelSpec = toml::from_str(s)?;
        spec.layout()?;
        Ok(spec)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        Self::from_toml_str(&text)
    }

    pub fn n_random(&self) -> usize {
        self.terms.iter().filter(|t| t.random).count()
    }

    /// The same model with every correlation removed.
    pub fn uncorrelated(&self) -> Self {
        Self {
            correlation: CorrelationSpec::default(),
            ..self.clone()
        }
    }

    /// Checks the spec and resolves the parameter layout.
    pub fn layout(&self) -> Result<Layout> {
        if self.terms.is_empty() {
            return Err(Error::InvalidSpec("model has no terms".into()));
        }
        if self.draws.count == 0 {
            return Err(Error::InvalidSpec("draw count must be at least 1".into()));
        }
        let mut seen = HashSet::new();
        let mut term_alt = Vec::new();
        let mut term_slot = Vec::new();
        let mut slot_term = Vec::new();
        for (i, t) in self.terms.iter().enumerate() {
            let alt = t.alternative_index().ok_or_else(|| {
                Error::InvalidSpec(format!("unknown alternative '{}'", t.alternative))
            })?;
            if alt == 0 {
                return Err(Error::InvalidSpec(format!(
                    "term {} is on the reference alternative",
                    t.name()
                )));
            }
            if !seen.insert(t.name()) {
                return Err(Error::InvalidSpec(format!("duplicate term {}", t.name())));
            }
            if !t.random && (t.zero_mean || !t.heterogeneity.is_empty()) {
                return Err(Error::InvalidSpec(format!(
                    "term {} is fixed but declares random-only options",
                    t.name()
                )));
            }
            term_alt.push(alt);
            if t.random {
                term_slot.push(Some(slot_term.len()));
                slot_term.push(i);
            } else {
                term_slot.push(None);
            }
        }
        let k = slot_term.len();
        let slot_of = |name: &str| {
            self.terms
                .iter()
                .position(|t| t.name() == name)
                .and_then(|i| term_slot[i])
                .ok_or_else(|| {
                    Error::InvalidSpec(format!("'{name}' is not a random term of this model"))
                })
        };
        let mut mask = vec![vec![false; k]; k];
        for (p, row) in mask.iter_mut().enumerate() {
            row[p] = true;
            if self.correlation.full {
                row[..p].iter_mut().for_each(|m| *m = true);
            }
        }
        for block in &self.correlation.blocks {
            let slots = block
                .iter()
                .map(|n| slot_of(n))
                .collect::<Result<Vec<_>>>()?;
            for &a in &slots {
                for &b in &slots {
                    if a > b {
                        mask[a][b] = true;
                    }
                }
            }
        }
        for [a, b] in &self.correlation.zero {
            let (a, b) = (slot_of(a)?, slot_of(b)?);
            if a == b {
                return Err(Error::InvalidSpec(
                    "a variance cannot be constrained to zero".into(),
                ));
            }
            mask[a.max(b)][a.min(b)] = false;
        }

        let mut kinds = Vec::new();
        let mut names = Vec::new();
        for (i, t) in self.terms.iter().enumerate() {
            if !t.zero_mean {
                kinds.push(ParamKind::Mean { term: i });
                names.push(t.name());
            }
        }
        for (p, &i) in slot_term.iter().enumerate() {
            for (h, var) in self.terms[i].heterogeneity.iter().enumerate() {
                kinds.push(ParamKind::Theta { slot: p, var: h });
                names.push(format!("{}|{}", self.terms[i].name(), var));
            }
        }
        for p in 0..k {
            for q in 0..=p {
                if mask[p][q] {
                    kinds.push(ParamKind::Cholesky { row: p, col: q });
                    names.push(format!(
                        "chol[{},{}]",
                        self.terms[slot_term[p]].name(),
                        self.terms[slot_term[q]].name()
                    ));
                }
            }
        }
        Ok(Layout {
            kinds,
            names,
            term_alt,
            term_slot,
            slot_term,
            mask,
        })
    }

    /// Fails with `InvalidSpec` if a variable is missing from the data.
    pub fn check_variables(&self, data: &ChoiceDataset) -> Result<()> {
        for t in &self.terms {
            for v in std::iter::once(&t.variable).chain(&t.heterogeneity) {
                if v != CONSTANT && data.column_index(v).is_none() {
                    return Err(Error::InvalidSpec(format!(
                        "covariate '{v}' of term {} is not in the data",
                        t.name()
                    )));
                }
            }
        }
        Ok(())
    }
}

impl Layout {
    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn n_random(&self) -> usize {
        self.slot_term.len()
    }

    /// Indices of Θ and Cholesky parameters.
    pub fn mixing_indices(&self) -> Vec<usize> {
        self.kinds
            .iter()
            .enumerate()
            .filter(|(_, k)| !matches!(k, ParamKind::Mean { .. }))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn unpack(&self, theta: &[f64], spec: &ModelSpec) -> Result<Parameters> {
        if theta.len() != self.len() {
            return Err(Error::dim("parameter vector", self.len(), theta.len()));
        }
        let k = self.n_random();
        let mut p = Parameters {
            means: vec![0.0; spec.terms.len()],
            random: self.term_slot.clone(),
            theta: self
                .slot_term
                .iter()
                .map(|&i| vec![0.0; spec.terms[i].heterogeneity.len()])
                .collect(),
            gamma: DMatrix::zeros(k, k),
        };
        for (kind, &v) in self.kinds.iter().zip(theta) {
            match *kind {
                ParamKind::Mean { term } => p.means[term] = v,
                ParamKind::Theta { slot, var } => p.theta[slot][var] = v,
                ParamKind::Cholesky { row, col } if row == col => p.gamma[(row, col)] = v.abs(),
                ParamKind::Cholesky { row, col } => p.gamma[(row, col)] = v,
            }
        }
        Ok(p)
    }

    /// Flat vector for `params`; entries not in the layout are dropped.
    pub fn pack(&self, params: &Parameters) -> Vec<f64> {
        self.kinds
            .iter()
            .map(|kind| match *kind {
                ParamKind::Mean { term } => params.means[term],
                ParamKind::Theta { slot, var } => params.theta[slot][var],
                ParamKind::Cholesky { row, col } => params.gamma[(row, col)],
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPEC: &str = r#"
[[terms]]
alternative = "slight"
variable = "constant"

[[terms]]
alternative = "severe"
variable = "lead_avg_speed"
random = true
heterogeneity = ["zone1"]

[[terms]]
alternative = "severe"
variable = "follow_avg_speed"
random = true
zero_mean = true

[correlation]
blocks = [["severe:lead_avg_speed", "severe:follow_avg_speed"]]
"#;

    #[test]
    fn layout_order() {
        let spec = ModelSpec::from_toml_str(SPEC).unwrap();
        let l = spec.layout().unwrap();
        assert_eq!(
            l.kinds,
            vec![
                ParamKind::Mean { term: 0 },
                ParamKind::Mean { term: 1 },
                ParamKind::Theta { slot: 0, var: 0 },
                ParamKind::Cholesky { row: 0, col: 0 },
                ParamKind::Cholesky { row: 1, col: 0 },
                ParamKind::Cholesky { row: 1, col: 1 },
            ]
        );
        assert_eq!(l.mixing_indices(), vec![2, 3, 4, 5]);
        assert_eq!(spec.uncorrelated().layout().unwrap().len(), 5);
        assert_eq!(spec.draws.count, 1000);
        assert_eq!(spec.draws.skip, 100);
    }

    #[test]
    fn unpack_takes_absolute_diagonal() {
        let spec = ModelSpec::from_toml_str(SPEC).unwrap();
        let l = spec.layout().unwrap();
        let p = l.unpack(&[1.0, 2.0, 3.0, -0.5, 0.25, 0.75], &spec).unwrap();
        assert_eq!(p.gamma[(0, 0)], 0.5);
        assert_eq!(p.gamma[(0, 1)], 0.0);
        assert_eq!(p.means, vec![1.0, 2.0, 0.0]);
        assert_eq!(l.pack(&p), vec![1.0, 2.0, 3.0, 0.5, 0.25, 0.75]);
    }

    #[test]
    fn rejects_bad_specs() {
        let reference = "[[terms]]\nalternative = \"none\"\nvariable = \"constant\"\n";
        assert!(matches!(
            ModelSpec::from_toml_str(reference),
            Err(Error::InvalidSpec(_))
        ));
        let fixed_het =
            "[[terms]]\nalternative = \"slight\"\nvariable = \"x\"\nheterogeneity = [\"z\"]\n";
        assert!(ModelSpec::from_toml_str(fixed_het).is_err());
        let bad_block = SPEC.replace("severe:follow_avg_speed\"]]", "slight:constant\"]]");
        assert!(ModelSpec::from_toml_str(&bad_block).is_err());
    }

    fn single(mean: f64, gamma: &[f64], k: usize) -> Parameters {
        Parameters {
            means: vec![mean; k],
            random: (0..k).map(Some).collect(),
            theta: vec![Vec::new(); k],
            gamma: DMatrix::from_row_slice(k, k, gamma),
        }
    }

    #[test]
    fn degenerate_mixing_returns_means() {
        let p = single(-0.94, &[0.0], 1);
        assert_eq!(
            p.realize_coefficients(&[vec![]], &[1.3]).unwrap(),
            vec![-0.94]
        );
    }

    #[test]
    fn single_random_coefficient() {
        let p = single(-0.94, &[0.78], 1);
        let b = p.realize_coefficients(&[vec![]], &[1.0]).unwrap();
        assert!((b[0] - -0.16).abs() < 1e-12);
    }

    #[test]
    fn correlated_shift() {
        let p = single(0.0, &[0.783, 0.0, -0.672, 0.207], 2);
        let b = p
            .realize_coefficients(&[vec![], vec![]], &[1.0, 1.0])
            .unwrap();
        assert!((b[1] - -0.465).abs() < 1e-12);
    }

    #[test]
    fn heterogeneity_shifts_mean() {
        let mut p = single(1.0, &[0.0], 1);
        p.theta = vec![vec![0.5, -2.0]];
        let b = p.realize_coefficients(&[vec![2.0, 1.0]], &[0.0]).unwrap();
        assert_eq!(b, vec![0.0]);
    }

    #[test]
    fn wrong_draw_dimension() {
        let p = single(0.0, &[1.0], 1);
        assert!(matches!(
            p.realize_coefficients(&[vec![]], &[1.0, 2.0]),
            Err(Error::DimensionMismatch {
                expected: 1,
                got: 2,
                ..
            })
        ));
    }
}
