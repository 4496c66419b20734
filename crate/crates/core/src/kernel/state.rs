use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{normalize_deg, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VehicleId(pub u64);

impl fmt::Display for VehicleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Footprint corners in the order A, B, C, D: front-left, front-right, rear-right, rear-left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Corner {
    FrontLeft,
    FrontRight,
    RearRight,
    RearLeft,
}

impl Corner {
    pub const ALL: [Corner; 4] = [
        Corner::FrontLeft,
        Corner::FrontRight,
        Corner::RearRight,
        Corner::RearLeft,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn side(self) -> Side {
        match self {
            Corner::FrontLeft | Corner::RearLeft => Side::Left,
            Corner::FrontRight | Corner::RearRight => Side::Right,
        }
    }

    pub fn is_front(self) -> bool {
        matches!(self, Corner::FrontLeft | Corner::FrontRight)
    }

    pub fn letter(self) -> char {
        ['A', 'B', 'C', 'D'][self.index()]
    }
}

/// Side of a vehicle relative to its heading; each side line is traced by one front and one rear corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn corners(self) -> (Corner, Corner) {
        match self {
            Side::Left => (Corner::FrontLeft, Corner::RearLeft),
            Side::Right => (Corner::FrontRight, Corner::RearRight),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerSet {
    pub a: Vec2,
    pub b: Vec2,
    pub c: Vec2,
    pub d: Vec2,
}

impl CornerSet {
    pub fn get(&self, corner: Corner) -> Vec2 {
        match corner {
            Corner::FrontLeft => self.a,
            Corner::FrontRight => self.b,
            Corner::RearRight => self.c,
            Corner::RearLeft => self.d,
        }
    }

    /// Counter-clockwise polygon (A, D, C, B).
    pub fn polygon(&self) -> [Vec2; 4] {
        [self.a, self.d, self.c, self.b]
    }
}

/// One vehicle's oriented rectangular footprint and motion at an instant.
///
/// Heading is in degrees, counter-clockwise from the +x axis; speed is along the heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicState {
    pub vehicle_id: VehicleId,
    pub centroid: Vec2,
    pub heading_deg: f64,
    pub speed: f64,
    pub length: f64,
    pub width: f64,
}

impl KinematicState {
    pub fn new(
        vehicle_id: VehicleId,
        centroid: Vec2,
        heading_deg: f64,
        speed: f64,
        length: f64,
        width: f64,
    ) -> Result<Self> {
        let state = Self {
            vehicle_id,
            centroid,
            heading_deg: normalize_deg(heading_deg),
            speed,
            length,
            width,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: &str| {
            Err(Error::InvalidState {
                vehicle: self.vehicle_id.0,
                reason: reason.to_string(),
            })
        };
        if !(self.centroid.x.is_finite() && self.centroid.y.is_finite()) {
            return fail("centroid must be finite");
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return fail("length must be positive");
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return fail("width must be positive");
        }
        if !(self.speed >= 0.0 && self.speed.is_finite()) {
            return fail("speed must be non-negative");
        }
        if !(0.0..360.0).contains(&self.heading_deg) {
            return fail("heading must lie in [0, 360)");
        }
        Ok(())
    }

    pub fn direction(&self) -> Vec2 {
        Vec2::from_heading_deg(self.heading_deg)
    }

    pub fn velocity(&self) -> Vec2 {
        self.direction() * self.speed
    }

    pub fn front_center(&self) -> Vec2 {
        self.centroid + self.direction() * (0.5 * self.length)
    }

    pub fn rear_center(&self) -> Vec2 {
        self.centroid - self.direction() * (0.5 * self.length)
    }

    /// State after `dt` seconds of constant-velocity motion.
    pub fn advanced(&self, dt: f64) -> Self {
        Self {
            centroid: self.centroid + self.velocity() * dt,
            ..*self
        }
    }
}

/// The four footprint corners of `state`.
pub fn corners(state: &KinematicState) -> CornerSet {
    let h = state.direction();
    let n = h.left_normal();
    let half_l = h * (0.5 * state.length);
    let half_w = n * (0.5 * state.width);
    let c = state.centroid;
    CornerSet {
        a: c + half_l + half_w,
        b: c + half_l - half_w,
        c: c - half_l - half_w,
        d: c - half_l + half_w,
    }
}
