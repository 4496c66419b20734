//! Per-frame speed, acceleration and turning rate of each track.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::signed_angle_diff_deg;
use crate::kernel::{KinematicState, VehicleId};

use super::io::{Payment, TrajectoryFrame, VehicleClass};

/// Series derived from a track, one entry per frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kinematics {
    /// Heading in degrees, from the detector or from displacement.
    pub heading: Vec<f64>,
    /// Instantaneous speed (m/s).
    pub speed: Vec<f64>,
    /// Mean speed over the preceding second; `None` until a full second is available.
    pub avg_speed_1s: Vec<Option<f64>>,
    /// m/s².
    pub acceleration: Vec<f64>,
    /// Magnitude of the turning rate (deg/s).
    pub angular_speed: Vec<f64>,
    /// Turning rate with clockwise positive (deg/s).
    pub signed_angular_speed: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleTrack {
    pub vehicle_id: VehicleId,
    pub vehicle_class: VehicleClass,
    pub payment: Payment,
    pub frames: Vec<TrajectoryFrame>,
    pub kinematics: Option<Kinematics>,
}

impl VehicleTrack {
    /// Builds a track from frames of one vehicle in increasing frame order.
    ///
    /// # Panics
    /// If `frames` is empty.
    pub fn from_frames(frames: Vec<TrajectoryFrame>) -> Self {
        let first = frames[0];
        Self {
            vehicle_id: first.vehicle_id,
            vehicle_class: first.vehicle_class,
            payment: first.payment,
            frames,
            kinematics: None,
        }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Position of `frame` in the track.
    pub fn index_of(&self, frame: i64) -> Option<usize> {
        self.frames.binary_search_by_key(&frame, |f| f.frame).ok()
    }

    /// Instantaneous kinematic state at row `index`; requires derived kinematics.
    pub fn state_at(&self, index: usize) -> Result<KinematicState> {
        let k = self.kinematics.as_ref().ok_or_else(|| {
            Error::Config(format!(
                "kinematics of vehicle {} not derived",
                self.vehicle_id
            ))
        })?;
        let f = &self.frames[index];
        KinematicState::new(
            self.vehicle_id,
            f.centroid,
            k.heading[index],
            k.speed[index],
            f.length,
            f.width,
        )
    }
}

/// Headings for every frame: detector values where given, otherwise the direction of
/// travel; frames without movement inherit the nearest known heading.
fn fill_headings(frames: &[TrajectoryFrame]) -> Vec<f64> {
    let n = frames.len();
    let mut out: Vec<Option<f64>> = (0..n)
        .map(|i| {
            frames[i].heading.or_else(|| {
                let (a, b) = if i == 0 { (0, 1) } else { (i - 1, i) };
                let d = frames[b].centroid - frames[a].centroid;
                (d.norm() > 1e-9).then(|| d.y.atan2(d.x).to_degrees())
            })
        })
        .collect();
    for i in 1..n {
        if out[i].is_none() {
            out[i] = out[i - 1];
        }
    }
    for i in (0..n.saturating_sub(1)).rev() {
        if out[i].is_none() {
            out[i] = out[i + 1];
        }
    }
    out.into_iter().map(|h| h.unwrap_or(0.0)).collect()
}

/// Derives speed, acceleration, turning rate and trailing one-second mean speed.
///
/// Speed and turning rate use backward differences (forward at the first frame);
/// acceleration is a central difference of speed, one-sided at the ends.
pub fn derive_kinematics(mut track: VehicleTrack, fps: u32) -> Result<VehicleTrack> {
    let n = track.len();
    if n < 2 {
        return Err(Error::TooShort {
            vehicle: track.vehicle_id.0,
            frames: n,
            required: 2,
        });
    }
    if fps == 0 {
        return Err(Error::Config("fps must be positive".into()));
    }
    let fr = &track.frames;
    let dt = |a: usize, b: usize| (fr[b].frame - fr[a].frame) as f64 / fps as f64;
    let back = |i: usize| if i == 0 { (0, 1) } else { (i - 1, i) };

    let heading = fill_headings(fr);
    let speed: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = back(i);
            (fr[b].centroid - fr[a].centroid).norm() / dt(a, b)
        })
        .collect();
    let signed_angular_speed: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = back(i);
            -signed_angle_diff_deg(heading[a], heading[b]) / dt(a, b)
        })
        .collect();
    let acceleration: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = match i {
                0 => (0, 1),
                i if i == n - 1 => (n - 2, n - 1),
                i => (i - 1, i + 1),
            };
            (speed[b] - speed[a]) / dt(a, b)
        })
        .collect();
    let window = fps as usize;
    let avg_speed_1s = (0..n)
        .map(|i| (i >= window).then(|| speed[i - window..i].iter().sum::<f64>() / window as f64))
        .collect();

    track.kinematics = Some(Kinematics {
        heading,
        speed,
        avg_speed_1s,
        acceleration,
        angular_speed: signed_angular_speed.iter().map(|w| w.abs()).collect(),
        signed_angular_speed,
    });
    Ok(track)
}
