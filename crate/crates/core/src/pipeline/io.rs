//! Delimited-text trajectory input and output.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::kernel::VehicleId;

use super::kinematics::VehicleTrack;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VehicleClass {
    PrivateCar,
    Taxi,
    GoodsVehicle,
    Bus,
    Motorcycle,
}

impl VehicleClass {
    pub const ALL: [VehicleClass; 5] = [
        VehicleClass::PrivateCar,
        VehicleClass::Taxi,
        VehicleClass::GoodsVehicle,
        VehicleClass::Bus,
        VehicleClass::Motorcycle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VehicleClass::PrivateCar => "private_car",
            VehicleClass::Taxi => "taxi",
            VehicleClass::GoodsVehicle => "goods_vehicle",
            VehicleClass::Bus => "bus",
            VehicleClass::Motorcycle => "motorcycle",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            VehicleClass::PrivateCar => "Private car",
            VehicleClass::Taxi => "Taxi",
            VehicleClass::GoodsVehicle => "Goods vehicle",
            VehicleClass::Bus => "Bus",
            VehicleClass::Motorcycle => "Motorcycle",
        }
    }
}

fn normalize_token(s: &str) -> String {
    s.trim().to_ascii_lowercase().replace([' ', '-'], "_")
}

impl FromStr for VehicleClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match normalize_token(s).as_str() {
            "private_car" | "car" | "privatecar" => Ok(VehicleClass::PrivateCar),
            "taxi" => Ok(VehicleClass::Taxi),
            "goods_vehicle" | "goods" | "goodsvehicle" | "truck" => Ok(VehicleClass::GoodsVehicle),
            "bus" => Ok(VehicleClass::Bus),
            "motorcycle" | "motorbike" => Ok(VehicleClass::Motorcycle),
            _ => Err(format!("unknown vehicle class '{s}'")),
        }
    }
}

impl fmt::Display for VehicleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payment {
    Manual,
    Electronic,
}

impl Payment {
    pub fn as_str(self) -> &'static str {
        match self {
            Payment::Manual => "manual",
            Payment::Electronic => "electronic",
        }
    }
}

impl FromStr for Payment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match normalize_token(s).as_str() {
            "manual" | "cash" => Ok(Payment::Manual),
            "electronic" | "etc" | "autotoll" => Ok(Payment::Electronic),
            _ => Err(format!("unknown payment type '{s}'")),
        }
    }
}

impl fmt::Display for Payment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One detected vehicle in one video frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFrame {
    pub frame: i64,
    pub vehicle_id: VehicleId,
    pub centroid: Vec2,
    pub length: f64,
    pub width: f64,
    /// Detector heading in degrees; `None` when it must come from displacement.
    pub heading: Option<f64>,
    pub vehicle_class: VehicleClass,
    pub payment: Payment,
}

/// Header names of the trajectory columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMap {
    pub frame: String,
    pub vehicle_id: String,
    pub centroid_x: String,
    pub centroid_y: String,
    pub length: String,
    pub width: String,
    /// Optional; when the column is absent or a cell is blank the heading is derived.
    pub heading: Option<String>,
    pub vehicle_class: String,
    pub payment: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            frame: "frame".into(),
            vehicle_id: "vehicle_id".into(),
            centroid_x: "centroid_x".into(),
            centroid_y: "centroid_y".into(),
            length: "length".into(),
            width: "width".into(),
            heading: Some("heading".into()),
            vehicle_class: "vehicle_class".into(),
            payment: "payment".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FormatConfig {
    pub delimiter: char,
    pub columns: ColumnMap,
    /// Video frame rate (frames per second).
    pub fps: u32,
}

impl Default for FormatConfig {
    fn default() -> Self {
        Self {
            delimiter: ',',
            columns: ColumnMap::default(),
            fps: 30,
        }
    }
}

impl FormatConfig {
    fn delimiter_byte(&self) -> Result<u8> {
        u8::try_from(self.delimiter)
            .map_err(|_| Error::Config(format!("delimiter '{}' is not ASCII", self.delimiter)))
    }
}

struct Indices {
    frame: usize,
    vehicle_id: usize,
    x: usize,
    y: usize,
    length: usize,
    width: usize,
    heading: Option<usize>,
    class: usize,
    payment: usize,
}

fn locate(headers: &csv::StringRecord, cols: &ColumnMap) -> Result<Indices> {
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::SchemaMismatch {
                line: 1,
                reason: format!("missing column '{name}'"),
            })
    };
    Ok(Indices {
        frame: find(&cols.frame)?,
        vehicle_id: find(&cols.vehicle_id)?,
        x: find(&cols.centroid_x)?,
        y: find(&cols.centroid_y)?,
        length: find(&cols.length)?,
        width: find(&cols.width)?,
        heading: cols
            .heading
            .as_deref()
            .and_then(|h| headers.iter().position(|c| c.trim() == h)),
        class: find(&cols.vehicle_class)?,
        payment: find(&cols.payment)?,
    })
}

fn field<T: FromStr>(rec: &csv::StringRecord, idx: usize, name: &str, line: usize) -> Result<T>
where
    T::Err: fmt::Display,
{
    let raw = rec.get(idx).ok_or_else(|| Error::SchemaMismatch {
        line,
        reason: format!("missing field '{name}'"),
    })?;
    raw.trim()
        .parse()
        .map_err(|e: T::Err| Error::SchemaMismatch {
            line,
            reason: format!("bad {name} '{raw}': {e}"),
        })
}

fn parse_row(rec: &csv::StringRecord, ix: &Indices, line: usize) -> Result<TrajectoryFrame> {
    let heading = match ix.heading.and_then(|i| rec.get(i)).map(str::trim) {
        None | Some("") => None,
        Some(_) => Some(field::<f64>(rec, ix.heading.unwrap(), "heading", line)?),
    };
    let frame = TrajectoryFrame {
        frame: field(rec, ix.frame, "frame", line)?,
        vehicle_id: VehicleId(field(rec, ix.vehicle_id, "vehicle_id", line)?),
        centroid: Vec2::new(
            field(rec, ix.x, "centroid_x", line)?,
            field(rec, ix.y, "centroid_y", line)?,
        ),
        length: field(rec, ix.length, "length", line)?,
        width: field(rec, ix.width, "width", line)?,
        heading,
        vehicle_class: field(rec, ix.class, "vehicle_class", line)?,
        payment: field(rec, ix.payment, "payment", line)?,
    };
    let finite = [
        frame.centroid.x,
        frame.centroid.y,
        frame.length,
        frame.width,
    ]
    .iter()
    .chain(frame.heading.as_ref())
    .all(|v| v.is_finite());
    if !finite || frame.length <= 0.0 || frame.width <= 0.0 {
        return Err(Error::SchemaMismatch {
            line,
            reason: "coordinates must be finite and dimensions positive".into(),
        });
    }
    Ok(frame)
}

/// Parses trajectory rows from any reader. Tracks come back sorted by vehicle id,
/// frames in order; kinematics are not yet derived.
pub fn read_trajectories<R: Read>(reader: R, format: &FormatConfig) -> Result<Vec<VehicleTrack>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(format.delimiter_byte()?)
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() {
        log::warn!("trajectory input is empty");
        return Ok(Vec::new());
    }
    let ix = locate(&headers, &format.columns)?;

    let mut by_vehicle: BTreeMap<VehicleId, Vec<TrajectoryFrame>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let row = parse_row(&rec, &ix, line)?;
        let frames = by_vehicle.entry(row.vehicle_id).or_default();
        if let Some(prev) = frames.last() {
            if row.frame <= prev.frame {
                return Err(Error::NonMonotoneFrames {
                    vehicle: row.vehicle_id.0,
                    frame: row.frame,
                    line,
                });
            }
            if row.vehicle_class != prev.vehicle_class || row.payment != prev.payment {
                return Err(Error::SchemaMismatch {
                    line,
                    reason: format!(
                        "class or payment of vehicle {} changes between frames",
                        row.vehicle_id
                    ),
                });
            }
        }
        frames.push(row);
    }
    if by_vehicle.is_empty() {
        log::warn!("trajectory input has no rows");
    }
    Ok(by_vehicle
        .into_values()
        .map(VehicleTrack::from_frames)
        .collect())
}

pub fn load_trajectories(path: &Path, format: &FormatConfig) -> Result<Vec<VehicleTrack>> {
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    read_trajectories(file, format)
}

/// Writes frames in the input format understood by [`read_trajectories`].
pub fn write_trajectories<W: Write>(
    writer: W,
    frames: &[TrajectoryFrame],
    format: &FormatConfig,
) -> Result<()> {
    let c = &format.columns;
    let mut w = csv::WriterBuilder::new()
        .delimiter(format.delimiter_byte()?)
        .from_writer(writer);
    let mut header = vec![
        c.frame.as_str(),
        c.vehicle_id.as_str(),
        c.centroid_x.as_str(),
        c.centroid_y.as_str(),
        c.length.as_str(),
        c.width.as_str(),
    ];
    if let Some(h) = &c.heading {
        header.push(h);
    }
    header.extend([c.vehicle_class.as_str(), c.payment.as_str()]);
    if frames.is_empty() {
        w.flush()?;
        return Ok(());
    }
    w.write_record(&header)?;
    for f in frames {
        let mut row = vec![
            f.frame.to_string(),
            f.vehicle_id.to_string(),
            f.centroid.x.to_string(),
            f.centroid.y.to_string(),
            f.length.to_string(),
            f.width.to_string(),
        ];
        if c.heading.is_some() {
            row.push(f.heading.map_or(String::new(), |h| h.to_string()));
        }
        row.push(f.vehicle_class.to_string());
        row.push(f.payment.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
