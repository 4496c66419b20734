//! Choice data: outcomes, group membership and named covariates.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::ConflictType;
use crate::pipeline::{InteractionObservation, COVARIATE_NAMES};

/// Outcome labels; the first is the reference alternative.
pub const ALTERNATIVES: [&str; 3] = ["none", "slight", "severe"];

/// Name of the implicit all-ones covariate.
pub const CONSTANT: &str = "constant";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiceDataset {
    /// Covariate names, one column of `x` each.
    pub names: Vec<String>,
    /// Row-major `n × names.len()` covariate matrix.
    pub x: Vec<f64>,
    /// Chosen alternative index per observation.
    pub outcomes: Vec<usize>,
    /// Group index per observation; groups are numbered by sorted label.
    pub groups: Vec<usize>,
    pub group_labels: Vec<String>,
}

fn parse_outcome(s: &str) -> Option<usize> {
    let t = s.trim().to_ascii_lowercase();
    ALTERNATIVES
        .iter()
        .position(|a| *a == t)
        .or_else(|| t.parse::<usize>().ok().filter(|&i| i < ALTERNATIVES.len()))
}

impl ChoiceDataset {
    /// Builds a dataset from per-observation group labels, outcomes and covariate rows.
    pub fn new(
        names: Vec<String>,
        rows: Vec<Vec<f64>>,
        outcomes: Vec<usize>,
        group_labels: Vec<String>,
    ) -> Result<Self> {
        let n = rows.len();
        if outcomes.len() != n || group_labels.len() != n {
            return Err(Error::DimensionMismatch {
                what: "observation count".into(),
                expected: n,
                got: outcomes.len().min(group_labels.len()),
            });
        }
        if let Some(r) = rows.iter().find(|r| r.len() != names.len()) {
            return Err(Error::dim("covariate row", names.len(), r.len()));
        }
        if let Some(&o) = outcomes.iter().find(|&&o| o >= ALTERNATIVES.len()) {
            return Err(Error::InvalidSpec(format!(
                "outcome index {o} out of range"
            )));
        }
        let mut index: BTreeMap<&str, usize> =
            group_labels.iter().map(|g| (g.as_str(), 0)).collect();
        for (i, v) in index.values_mut().enumerate() {
            *v = i;
        }
        let groups = group_labels.iter().map(|g| index[g.as_str()]).collect();
        let labels = index.keys().map(|s| s.to_string()).collect();
        Ok(Self {
            names,
            x: rows.into_iter().flatten().collect(),
            outcomes,
            groups,
            group_labels: labels,
        })
    }

    /// Observations of one conflict family with the pipeline's covariate columns.
    pub fn from_observations(obs: &[InteractionObservation], family: ConflictType) -> Result<Self> {
        let chosen: Vec<_> = obs.iter().filter(|o| o.family == family).collect();
        Self::new(
            COVARIATE_NAMES.iter().map(|s| s.to_string()).collect(),
            chosen.iter().map(|o| o.covariates().to_vec()).collect(),
            chosen.iter().map(|o| o.outcome.index()).collect(),
            chosen.iter().map(|o| o.group_id.to_string()).collect(),
        )
    }

    /// Reads a delimited table with an outcome column, a group column and numeric covariates.
    ///
    /// Outcomes may be labels (`none`, `slight`, `severe`) or indices. When `family`
    /// is given, only rows whose `family` column matches are kept. Non-numeric
    /// columns other than these are ignored.
    pub fn read_csv<R: Read>(
        reader: R,
        outcome_col: &str,
        group_col: &str,
        family: Option<&str>,
    ) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        let find = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::SchemaMismatch {
                    line: 1,
                    reason: format!("missing column '{name}'"),
                })
        };
        let oi = find(outcome_col)?;
        let gi = find(group_col)?;
        let fi = match family {
            Some(_) => Some(find("family")?),
            None => None,
        };
        let records: Vec<csv::StringRecord> =
            rdr.records().collect::<std::result::Result<_, _>>()?;
        let records: Vec<_> = records
            .into_iter()
            .filter(|r| match (fi, family) {
                (Some(i), Some(f)) => r.get(i).map(str::trim) == Some(f),
                _ => true,
            })
            .collect();
        // A column is numeric when its first value parses; later failures are data errors.
        let numeric: Vec<usize> = (0..headers.len())
            .filter(|&c| c != oi && c != gi && Some(c) != fi)
            .filter(|&c| {
                records
                    .first()
                    .is_none_or(|r| r.get(c).is_some_and(|v| v.trim().parse::<f64>().is_ok()))
            })
            .collect();
        let mut rows = Vec::with_capacity(records.len());
        let mut outcomes = Vec::with_capacity(records.len());
        let mut groups = Vec::with_capacity(records.len());
        for r in &records {
            let line = r.position().map_or(0, |p| p.line() as usize);
            let raw = r.get(oi).unwrap_or("");
            outcomes.push(parse_outcome(raw).ok_or_else(|| Error::SchemaMismatch {
                line,
                reason: format!("bad outcome '{raw}'"),
            })?);
            groups.push(r.get(gi).unwrap_or("").trim().to_string());
            let row = numeric
                .iter()
                .map(|&c| {
                    let v = r.get(c).unwrap_or("").trim();
                    v.parse::<f64>().map_err(|_| Error::SchemaMismatch {
                        line,
                        reason: format!("column '{}': bad value '{v}'", headers[c].trim()),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Self::new(
            numeric
                .iter()
                .map(|&c| headers[c].trim().to_string())
                .collect(),
            rows,
            outcomes,
            groups,
        )
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn n_groups(&self) -> usize {
        self.group_labels.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Values of a covariate; the constant yields ones.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        if name == CONSTANT {
            return Ok(vec![1.0; self.len()]);
        }
        let k = self.names.len();
        let c = self
            .column_index(name)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown covariate '{name}'")))?;
        Ok((0..self.len()).map(|i| self.x[i * k + c]).collect())
    }

    /// Observation indices of every group, in group order.
    pub fn group_members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_groups()];
        for (i, &g) in self.groups.iter().enumerate() {
            out[g].push(i);
        }
        out
    }

    /// Observations per outcome.
    pub fn outcome_counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for &o in &self.outcomes {
            c[o] += 1;
        }
        c
    }

    /// Writes the dataset as a table readable by [`ChoiceDataset::read_csv`].
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["group_id".to_string(), "outcome".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        let k = self.names.len();
        for i in 0..self.len() {
            let mut row = vec![
                self.group_labels[self.groups[i]].clone(),
                ALTERNATIVES[self.outcomes[i]].to_string(),
            ];
            row.extend(self.x[i * k..(i + 1) * k].iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}
