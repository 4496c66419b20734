//! Figure data: trajectory polylines and TTC histograms as delimited tables.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::ConflictType;
use crate::pipeline::{InteractionObservation, Payment, VehicleClass, VehicleTrack};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub vehicle_id: u64,
    pub payment: Payment,
    pub class: VehicleClass,
    pub points: Vec<[f64; 2]>,
}

/// Centroid paths grouped by payment type, then vehicle id.
pub fn trajectory_polylines(
    tracks: &[VehicleTrack],
) -> Result<BTreeMap<&'static str, Vec<Polyline>>> {
    if tracks.is_empty() {
        return Err(Error::Empty("no trajectories to plot".into()));
    }
    let mut out: BTreeMap<&'static str, Vec<Polyline>> = BTreeMap::new();
    for t in tracks {
        out.entry(t.payment.as_str()).or_default().push(Polyline {
            vehicle_id: t.vehicle_id.0,
            payment: t.payment,
            class: t.vehicle_class,
            points: t
                .frames
                .iter()
                .map(|f| [f.centroid.x, f.centroid.y])
                .collect(),
        });
    }
    for lines in out.values_mut() {
        lines.sort_by_key(|l| l.vehicle_id);
    }
    Ok(out)
}

pub fn write_polylines<W: Write>(
    writer: W,
    groups: &BTreeMap<&'static str, Vec<Polyline>>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["payment", "vehicle_class", "vehicle_id", "point", "x", "y"])?;
    for (payment, lines) in groups {
        for l in lines {
            for (i, p) in l.points.iter().enumerate() {
                w.write_record([
                    payment.to_string(),
                    l.class.as_str().to_string(),
                    l.vehicle_id.to_string(),
                    i.to_string(),
                    p[0].to_string(),
                    p[1].to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub family: ConflictType,
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

/// TTC histogram per family with bins `[k·w, (k+1)·w)` up to the largest TTC.
pub fn ttc_histogram(
    observations: &[InteractionObservation],
    width: f64,
) -> Result<Vec<HistogramBin>> {
    if observations.is_empty() {
        return Err(Error::Empty("no observations to plot".into()));
    }
    if width.is_nan() || width <= 0.0 {
        return Err(Error::Config("histogram bin width must be positive".into()));
    }
    let mut out = Vec::new();
    for family in [ConflictType::RearEnd, ConflictType::Sideswipe] {
        let ttcs: Vec<f64> = observations
            .iter()
            .filter(|o| o.family == family)
            .map(|o| o.ttc)
            .collect();
        if ttcs.is_empty() {
            continue;
        }
        let max = ttcs.iter().copied().fold(0.0, f64::max);
        let bins = (max / width).floor() as usize + 1;
        let mut counts = vec![0usize; bins];
        for t in ttcs {
            counts[((t / width).floor() as usize).min(bins - 1)] += 1;
        }
        out.extend(
            counts
                .into_iter()
                .enumerate()
                .map(|(k, count)| HistogramBin {
                    family,
                    lower: k as f64 * width,
                    upper: (k + 1) as f64 * width,
                    count,
                }),
        );
    }
    Ok(out)
}

pub fn write_histogram<W: Write>(writer: W, bins: &[HistogramBin]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["family", "lower", "upper", "count"])?;
    for b in bins {
        let family = match b.family {
            ConflictType::RearEnd => "rear_end",
            ConflictType::Sideswipe => "sideswipe",
            ConflictType::Unsupported => "unsupported",
        };
        w.write_record([
            family.to_string(),
            b.lower.to_string(),
            b.upper.to_string(),
            b.count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use crate::kernel::VehicleId;
    use crate::pipeline::TrajectoryFrame;

    fn track(id: u64, payment: Payment) -> VehicleTrack {
        VehicleTrack::from_frames(
            (0..3)
                .map(|f| TrajectoryFrame {
                    frame: f,
                    vehicle_id: VehicleId(id),
                    centroid: Vec2::new(f as f64, id as f64),
                    length: 4.0,
                    width: 2.0,
                    heading: None,
                    vehicle_class: VehicleClass::Taxi,
                    payment,
                })
                .collect(),
        )
    }

    #[test]
    fn polylines_grouped_by_payment() {
        let groups =
            trajectory_polylines(&[track(2, Payment::Electronic), track(1, Payment::Manual)])
                .unwrap();
        assert_eq!(groups.len(), 2);
        assert_eq!(
            groups["manual"][0].points,
            vec![[0.0, 1.0], [1.0, 1.0], [2.0, 1.0]]
        );
        let mut buf = Vec::new();
        write_polylines(&mut buf, &groups).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 7);
    }

    #[test]
    fn empty_inputs() {
        assert!(matches!(trajectory_polylines(&[]), Err(Error::Empty(_))));
        assert!(matches!(ttc_histogram(&[], 0.5), Err(Error::Empty(_))));
    }
}
