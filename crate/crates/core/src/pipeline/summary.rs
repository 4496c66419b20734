//! Descriptive statistics of an observation set, per conflict family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::ConflictType;

use super::io::VehicleClass;
use super::observations::InteractionObservation;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub name: String,
    pub label: String,
    pub mean: f64,
    /// Sample standard deviation (n − 1); zero for a single observation.
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    pub family: ConflictType,
    pub rows: Vec<SummaryRow>,
    /// Observations with outcome none, slight, severe.
    pub counts: [usize; 3],
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub families: Vec<FamilySummary>,
}

fn describe(name: &str, label: &str, values: &[f64]) -> SummaryRow {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    SummaryRow {
        name: name.to_string(),
        label: label.to_string(),
        mean,
        sd,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

fn family_summary(family: ConflictType, obs: &[&InteractionObservation]) -> FamilySummary {
    let col =
        |f: &dyn Fn(&InteractionObservation) -> f64| obs.iter().map(|o| f(o)).collect::<Vec<_>>();
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    let mut rows = vec![
        describe(
            "electronic",
            "At least one vehicle uses electronic toll payment",
            &col(&|o| flag(o.electronic_involved)),
        ),
        describe("zone1", "Zone 1", &col(&|o| flag(o.zone == 1))),
        describe("zone2", "Zone 2", &col(&|o| flag(o.zone == 2))),
        describe("zone3", "Zone 3", &col(&|o| flag(o.zone >= 3))),
    ];
    for (prefix, title, leader) in [
        ("lead", "Leading vehicle", true),
        ("follow", "Following vehicle", false),
    ] {
        let pick = move |o: &InteractionObservation| if leader { o.leader } else { o.follower };
        rows.push(describe(
            &format!("{prefix}_avg_speed"),
            &format!("{title}: Average speed (m/s)"),
            &col(&|o| pick(o).avg_speed),
        ));
        rows.push(describe(
            &format!("{prefix}_acceleration"),
            &format!("{title}: Acceleration (m/s²)"),
            &col(&|o| pick(o).acceleration),
        ));
        rows.push(describe(
            &format!("{prefix}_angular_speed"),
            &format!("{title}: Angular speed (deg/s)"),
            &col(&|o| pick(o).angular_speed),
        ));
        for class in VehicleClass::ALL {
            rows.push(describe(
                &format!("{prefix}_{}", class.as_str()),
                &format!("{title}: {}", class.label()),
                &col(&|o| flag(pick(o).class == class)),
            ));
        }
    }
    let mut counts = [0; 3];
    for o in obs {
        counts[o.outcome.index()] += 1;
    }
    FamilySummary {
        family,
        rows,
        counts,
        total: obs.len(),
    }
}

/// Mean, sample SD, min and max of every covariate and the outcome counts, per family.
pub fn summarize_dataset(observations: &[InteractionObservation]) -> Result<DatasetSummary> {
    if observations.is_empty() {
        return Err(Error::Empty("no observations to summarize".into()));
    }
    let families = [ConflictType::RearEnd, ConflictType::Sideswipe]
        .into_iter()
        .filter_map(|f| {
            let obs: Vec<_> = observations.iter().filter(|o| o.family == f).collect();
            (!obs.is_empty()).then(|| family_summary(f, &obs))
        })
        .collect();
    Ok(DatasetSummary { families })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_statistics() {
        let r = describe("x", "x", &[10.0, 14.0]);
        assert_eq!(r.mean, 12.0);
        assert!((r.sd - 8f64.sqrt()).abs() < 1e-12);
        assert_eq!((r.min, r.max), (10.0, 14.0));
    }

    #[test]
    fn single_value_has_zero_sd() {
        let r = describe("x", "x", &[3.5]);
        assert_eq!((r.mean, r.sd), (3.5, 0.0));
    }

    #[test]
    fn empty_is_an_error() {
        assert!(matches!(summarize_dataset(&[]), Err(Error::Empty(_))));
    }
}
