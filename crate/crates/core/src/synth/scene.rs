//! Synthetic trajectory scenes in the pipeline input format.

use std::collections::HashSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::kernel::VehicleId;
use crate::pipeline::{write_trajectories, FormatConfig, Payment, TrajectoryFrame, VehicleClass};

/// A change of speed and/or heading taking effect at `frame`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub frame: i64,
    pub speed: Option<f64>,
    pub heading: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneVehicle {
    pub id: u64,
    /// Centroid at `start_frame`.
    pub centroid: [f64; 2],
    pub heading: f64,
    pub speed: f64,
    pub length: f64,
    pub width: f64,
    #[serde(default = "default_class")]
    pub class: VehicleClass,
    #[serde(default = "default_payment")]
    pub payment: Payment,
    #[serde(default)]
    pub start_frame: i64,
    /// Last frame (inclusive); defaults to the end of the scene.
    #[serde(default)]
    pub end_frame: Option<i64>,
    #[serde(default)]
    pub profile: Vec<ProfilePoint>,
}

fn default_class() -> VehicleClass {
    VehicleClass::PrivateCar
}

fn default_payment() -> Payment {
    Payment::Manual
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    #[serde(default = "default_fps")]
    pub fps: u32,
    /// Frames 0..frames are generated.
    #[serde(default)]
    pub frames: i64,
    #[serde(default)]
    pub vehicles: Vec<SceneVehicle>,
}

fn default_fps() -> u32 {
    30
}

impl SceneSpec {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let spec: SceneSpec = toml::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fps == 0 {
            return Err(Error::Config("scene fps must be positive".into()));
        }
        let mut ids = HashSet::new();
        for v in &self.vehicles {
            if !ids.insert(v.id) {
                return Err(Error::Config(format!(
                    "duplicate vehicle id {} in scene",
                    v.id
                )));
            }
            let ok = v.length > 0.0
                && v.width > 0.0
                && v.speed >= 0.0
                && v.centroid
                    .iter()
                    .chain([&v.heading, &v.speed])
                    .all(|x| x.is_finite())
                && v.profile
                    .iter()
                    .all(|p| p.speed.is_none_or(|s| s >= 0.0 && s.is_finite()));
            if !ok {
                return Err(Error::Config(format!(
                    "invalid state for scene vehicle {}",
                    v.id
                )));
            }
        }
        Ok(())
    }
}

/// Frames of every vehicle, integrated at constant speed and heading between profile
/// points. Rows are ordered by frame, then vehicle id.
pub fn generate_scene(spec: &SceneSpec) -> Result<Vec<TrajectoryFrame>> {
    spec.validate()?;
    let dt = 1.0 / spec.fps as f64;
    let mut rows = Vec::new();
    for v in &spec.vehicles {
        let mut profile = v.profile.clone();
        profile.sort_by_key(|p| p.frame);
        let last = v.end_frame.unwrap_or(spec.frames - 1).min(spec.frames - 1);
        let (mut pos, mut speed, mut heading) =
            (Vec2::new(v.centroid[0], v.centroid[1]), v.speed, v.heading);
        let mut next = 0;
        for frame in v.start_frame..=last {
            while next < profile.len() && profile[next].frame <= frame {
                speed = profile[next].speed.unwrap_or(speed);
                heading = profile[next].heading.unwrap_or(heading);
                next += 1;
            }
            if frame >= 0 {
                rows.push(TrajectoryFrame {
                    frame,
                    vehicle_id: VehicleId(v.id),
                    centroid: pos,
                    length: v.length,
                    width: v.width,
                    heading: Some(heading),
                    vehicle_class: v.class,
                    payment: v.payment,
                });
            }
            pos = pos + Vec2::from_heading_deg(heading) * (speed * dt);
        }
    }
    rows.sort_by_key(|r| (r.frame, r.vehicle_id));
    Ok(rows)
}

/// Generates the scene and writes it in the trajectory input format.
pub fn write_scene<W: Write>(spec: &SceneSpec, writer: W, format: &FormatConfig) -> Result<()> {
    let rows = generate_scene(spec)?;
    write_trajectories(writer, &rows, format)
}
