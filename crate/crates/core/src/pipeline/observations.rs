//! Labelled interaction observations: pairing, filtering, sampling and covariates.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{convex_contains, Vec2};
use crate::kernel::{
    classify, modified_ttc_with, ConflictSeverity, ConflictType, KernelConfig, KinematicState,
    SeverityThresholds, TtcResult, VehicleId,
};

use super::io::{Payment, VehicleClass};
use super::kinematics::VehicleTrack;
use super::zones::{assign_zone, ZoneLabel, ZoneMap};

/// Unordered vehicle pair, stored with the smaller id first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupId(pub VehicleId, pub VehicleId);

impl GroupId {
    pub fn new(a: VehicleId, b: VehicleId) -> Self {
        if a <= b {
            Self(a, b)
        } else {
            Self(b, a)
        }
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

impl FromStr for GroupId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s
            .split_once('-')
            .ok_or_else(|| format!("bad group id '{s}'"))?;
        let parse = |t: &str| t.trim().parse().map(VehicleId).map_err(|e| format!("{e}"));
        Ok(Self::new(parse(a)?, parse(b)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CongestionFilterConfig {
    pub enabled: bool,
    pub window_seconds: f64,
    /// Mean speed (m/s) of all vehicles in the study area below which a window is congested.
    pub speed_threshold: f64,
}

impl Default for CongestionFilterConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            window_seconds: 10.0,
            speed_threshold: 3.0,
        }
    }
}

/// How frames of a pair are turned into observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Sampling {
    /// One observation per block of `frames` frames: the frame with the smallest TTC.
    Stride { frames: u32 },
    /// One observation per eligible frame.
    PerFrame,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling::Stride { frames: 30 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub fps: u32,
    pub gating_radius: f64,
    pub kernel: KernelConfig,
    pub thresholds: SeverityThresholds,
    pub congestion: CongestionFilterConfig,
    pub sampling: Sampling,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            fps: 30,
            gating_radius: 50.0,
            kernel: KernelConfig::default(),
            thresholds: SeverityThresholds::default(),
            congestion: CongestionFilterConfig::default(),
            sampling: Sampling::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.fps == 0 {
            return Err(Error::Config("fps must be positive".into()));
        }
        if self.gating_radius.is_nan() || self.gating_radius <= 0.0 {
            return Err(Error::Config("gating radius must be positive".into()));
        }
        if !self.thresholds.is_valid() {
            return Err(Error::Config(
                "thresholds must satisfy slight > severe > 0".into(),
            ));
        }
        if !(self.congestion.speed_threshold > 0.0 && self.congestion.window_seconds > 0.0) {
            return Err(Error::Config(
                "congestion window and speed threshold must be positive".into(),
            ));
        }
        if self.sampling == (Sampling::Stride { frames: 0 }) {
            return Err(Error::Config("sampling stride must be positive".into()));
        }
        Ok(())
    }
}

/// Covariates of one vehicle in its leader or follower role.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoleCovariates {
    pub vehicle_id: VehicleId,
    /// Mean speed over the preceding second (m/s).
    pub avg_speed: f64,
    pub acceleration: f64,
    /// Turning-rate magnitude (deg/s).
    pub angular_speed: f64,
    pub class: VehicleClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionObservation {
    pub group_id: GroupId,
    pub frame: i64,
    pub family: ConflictType,
    pub outcome: ConflictSeverity,
    pub ttc: f64,
    pub conflict_point: Vec2,
    /// One-based zone index.
    pub zone: usize,
    pub electronic_involved: bool,
    pub leader: RoleCovariates,
    pub follower: RoleCovariates,
}

/// Model covariate names, in the fixed column order of the observation table.
pub const COVARIATE_NAMES: [&str; 19] = [
    "electronic",
    "zone1",
    "zone2",
    "lead_avg_speed",
    "lead_acceleration",
    "lead_angular_speed",
    "lead_private_car",
    "lead_taxi",
    "lead_goods_vehicle",
    "lead_bus",
    "lead_motorcycle",
    "follow_avg_speed",
    "follow_acceleration",
    "follow_angular_speed",
    "follow_private_car",
    "follow_taxi",
    "follow_goods_vehicle",
    "follow_bus",
    "follow_motorcycle",
];

/// Identifier columns preceding the covariates in the observation table.
pub const ID_COLUMNS: [&str; 10] = [
    "group_id",
    "frame",
    "family",
    "outcome",
    "ttc",
    "leader_id",
    "follower_id",
    "conflict_x",
    "conflict_y",
    "zone",
];

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

impl InteractionObservation {
    /// Values in [`COVARIATE_NAMES`] order.
    pub fn covariates(&self) -> [f64; 19] {
        let mut out = [0.0; 19];
        out[0] = flag(self.electronic_involved);
        out[1] = flag(self.zone == 1);
        out[2] = flag(self.zone == 2);
        for (base, role) in [(3, &self.leader), (11, &self.follower)] {
            out[base] = role.avg_speed;
            out[base + 1] = role.acceleration;
            out[base + 2] = role.angular_speed;
            for (k, class) in VehicleClass::ALL.iter().enumerate() {
                out[base + 3 + k] = flag(role.class == *class);
            }
        }
        out
    }

    pub fn covariate(&self, name: &str) -> Option<f64> {
        COVARIATE_NAMES
            .iter()
            .position(|&n| n == name)
            .map(|i| self.covariates()[i])
    }
}

/// All pairs of vehicles present at `frame` whose centroids lie within `radius` metres.
pub fn pair_candidates(
    tracks: &[VehicleTrack],
    frame: i64,
    radius: f64,
) -> Vec<(KinematicState, KinematicState)> {
    let present: Vec<KinematicState> = tracks
        .iter()
        .filter_map(|t| t.index_of(frame).and_then(|i| t.state_at(i).ok()))
        .collect();
    close_pairs(&present, radius)
}

fn close_pairs(states: &[KinematicState], radius: f64) -> Vec<(KinematicState, KinematicState)> {
    let mut out = Vec::new();
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            if (states[i].centroid - states[j].centroid).norm() <= radius {
                let (a, b) = if states[i].vehicle_id <= states[j].vehicle_id {
                    (states[i], states[j])
                } else {
                    (states[j], states[i])
                };
                out.push((a, b));
            }
        }
    }
    out
}

/// Frames whose trailing window has a mean study-area speed below the threshold.
fn congested_frames(
    tracks: &[VehicleTrack],
    study: &[Vec2],
    config: &CongestionFilterConfig,
    fps: u32,
) -> HashMap<i64, bool> {
    let mut per_frame: BTreeMap<i64, (f64, usize)> = BTreeMap::new();
    for t in tracks {
        let Some(k) = &t.kinematics else { continue };
        for (i, f) in t.frames.iter().enumerate() {
            let e = per_frame.entry(f.frame).or_insert((0.0, 0));
            if convex_contains(study, f.centroid) {
                e.0 += k.speed[i];
                e.1 += 1;
            }
        }
    }
    let window = ((config.window_seconds * fps as f64).round() as i64).max(1);
    let frames: Vec<(i64, (f64, usize))> = per_frame.into_iter().collect();
    let mut out = HashMap::with_capacity(frames.len());
    let (mut lo, mut sum, mut count) = (0usize, 0.0, 0usize);
    for hi in 0..frames.len() {
        sum += frames[hi].1 .0;
        count += frames[hi].1 .1;
        while frames[lo].0 <= frames[hi].0 - window {
            sum -= frames[lo].1 .0;
            count -= frames[lo].1 .1;
            lo += 1;
        }
        let congested = count > 0 && sum / (count as f64) < config.speed_threshold;
        out.insert(frames[hi].0, config.enabled && congested);
    }
    out
}

struct Candidate {
    group: GroupId,
    frame: i64,
    result: TtcResult,
    family: ConflictType,
    outcome: ConflictSeverity,
    zone: usize,
    rows: [(usize, usize); 2],
}

/// Evaluates every close pair at every uncongested frame and emits one labelled
/// observation per sampling block, sorted by group then frame.
///
/// Covariates use the trailing one-second mean speed; pairs are only evaluated
/// once both vehicles have a full second of history.
pub fn build_observations(
    tracks: &[VehicleTrack],
    zones: &ZoneMap,
    config: &PipelineConfig,
) -> Result<Vec<InteractionObservation>> {
    config.validate()?;
    if let Some(t) = tracks.iter().find(|t| t.kinematics.is_none()) {
        return Err(Error::Config(format!(
            "kinematics of vehicle {} not derived",
            t.vehicle_id
        )));
    }
    let study = zones.study_polygon();
    let congested = congested_frames(tracks, &study, &config.congestion, config.fps);

    let mut by_frame: BTreeMap<i64, Vec<(usize, usize)>> = BTreeMap::new();
    for (ti, t) in tracks.iter().enumerate() {
        for (ri, f) in t.frames.iter().enumerate() {
            by_frame.entry(f.frame).or_default().push((ti, ri));
        }
    }
    let frames: Vec<(i64, Vec<(usize, usize)>)> = by_frame.into_iter().collect();

    let candidates: Vec<Candidate> = frames
        .par_iter()
        .filter(|(frame, _)| !congested.get(frame).copied().unwrap_or(false))
        .flat_map_iter(|(frame, present)| {
            let rows: Vec<(usize, usize)> = present
                .iter()
                .copied()
                .filter(|&(ti, ri)| {
                    tracks[ti].kinematics.as_ref().unwrap().avg_speed_1s[ri].is_some()
                })
                .collect();
            let states: Vec<KinematicState> = rows
                .iter()
                .filter_map(|&(ti, ri)| tracks[ti].state_at(ri).ok())
                .collect();
            let locate: HashMap<VehicleId, (usize, usize)> = rows
                .iter()
                .map(|&(ti, ri)| (tracks[ti].vehicle_id, (ti, ri)))
                .collect();
            close_pairs(&states, config.gating_radius)
                .into_iter()
                .filter_map(|(a, b)| {
                    let result = match modified_ttc_with(&a, &b, &config.kernel) {
                        Ok(r) => r,
                        Err(e) => {
                            log::debug!(
                                "frame {frame}, pair {}-{}: {e}",
                                a.vehicle_id,
                                b.vehicle_id
                            );
                            return None;
                        }
                    };
                    let (family, outcome) = match classify(&result, &config.thresholds) {
                        (Some(f @ (ConflictType::RearEnd | ConflictType::Sideswipe)), o) => (f, o),
                        _ => return None,
                    };
                    let zone = match assign_zone(result.conflict_point?, zones) {
                        ZoneLabel::Zone(z) => z,
                        _ => return None,
                    };
                    Some(Candidate {
                        group: GroupId::new(a.vehicle_id, b.vehicle_id),
                        frame: *frame,
                        family,
                        outcome,
                        zone,
                        rows: [locate[&result.leader_id], locate[&result.follower_id]],
                        result,
                    })
                })
                .collect::<Vec<_>>()
        })
        .collect();

    let mut chosen: BTreeMap<(GroupId, i64), Candidate> = BTreeMap::new();
    for c in candidates {
        let bucket = match config.sampling {
            Sampling::Stride { frames } => c.frame.div_euclid(frames as i64),
            Sampling::PerFrame => c.frame,
        };
        match chosen.get(&(c.group, bucket)) {
            Some(best)
                if best.result.ttc < c.result.ttc
                    || (best.result.ttc == c.result.ttc && best.frame <= c.frame) => {}
            _ => {
                chosen.insert((c.group, bucket), c);
            }
        }
    }

    let role = |(ti, ri): (usize, usize)| {
        let t = &tracks[ti];
        let k = t.kinematics.as_ref().unwrap();
        RoleCovariates {
            vehicle_id: t.vehicle_id,
            avg_speed: k.avg_speed_1s[ri].unwrap(),
            acceleration: k.acceleration[ri],
            angular_speed: k.angular_speed[ri],
            class: t.vehicle_class,
        }
    };
    Ok(chosen
        .into_values()
        .map(|c| {
            let [lr, fr] = c.rows;
            InteractionObservation {
                group_id: c.group,
                frame: c.frame,
                family: c.family,
                outcome: c.outcome,
                ttc: c.result.ttc,
                conflict_point: c.result.conflict_point.unwrap(),
                zone: c.zone,
                electronic_involved: tracks[lr.0].payment == Payment::Electronic
                    || tracks[fr.0].payment == Payment::Electronic,
                leader: role(lr),
                follower: role(fr),
            }
        })
        .collect())
}

fn family_str(f: ConflictType) -> &'static str {
    match f {
        ConflictType::RearEnd => "rear_end",
        ConflictType::Sideswipe => "sideswipe",
        ConflictType::Unsupported => "unsupported",
    }
}

pub fn outcome_str(o: ConflictSeverity) -> &'static str {
    match o {
        ConflictSeverity::None => "none",
        ConflictSeverity::Slight => "slight",
        ConflictSeverity::Severe => "severe",
    }
}

/// Writes the observation table: [`ID_COLUMNS`] followed by [`COVARIATE_NAMES`].
pub fn write_observations<W: Write>(
    writer: W,
    observations: &[InteractionObservation],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(ID_COLUMNS.iter().chain(COVARIATE_NAMES.iter()))?;
    for o in observations {
        let mut row = vec![
            o.group_id.to_string(),
            o.frame.to_string(),
            family_str(o.family).to_string(),
            outcome_str(o.outcome).to_string(),
            o.ttc.to_string(),
            o.leader.vehicle_id.to_string(),
            o.follower.vehicle_id.to_string(),
            o.conflict_point.x.to_string(),
            o.conflict_point.y.to_string(),
            o.zone.to_string(),
        ];
        row.extend(o.covariates().iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
