//! Overlap of the two swept corridors and the corner arrival times over it.
//!
//! The pair is put in a canonical order first: the second vehicle's heading is
//! rotated counter-clockwise from the first's by the intersecting angle
//! alpha in (0, 180). With that order the region corners are
//!
//! * `a` = right side line of the first ∩ left side line of the second,
//! * `b` = left of the first ∩ left of the second,
//! * `c` = left of the first ∩ right of the second,
//! * `d` = right of the first ∩ right of the second,
//!
//! so that `a` is where both vehicles enter the region first: the front-left
//! corner of the second vehicle reaches the right side of the first at `a`.

use serde::{Deserialize, Serialize};

use super::state::{corners, Corner, KinematicState, Side, VehicleId};
use crate::error::{Error, Result};
use crate::geometry::{centroid, line_intersection, signed_angle_diff_deg, signed_area, Vec2};

pub const DEFAULT_PARALLEL_CUTOFF_DEG: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionCorner {
    A,
    B,
    C,
    D,
}

impl RegionCorner {
    pub const ALL: [RegionCorner; 4] = [
        RegionCorner::A,
        RegionCorner::B,
        RegionCorner::C,
        RegionCorner::D,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Side line of (first, second) vehicle the corner lies on.
    pub fn sides(self) -> (Side, Side) {
        match self {
            RegionCorner::A => (Side::Right, Side::Left),
            RegionCorner::B => (Side::Left, Side::Left),
            RegionCorner::C => (Side::Left, Side::Right),
            RegionCorner::D => (Side::Right, Side::Right),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RegionShape {
    Parallelogram {
        a: Vec2,
        b: Vec2,
        c: Vec2,
        d: Vec2,
    },
    /// Headings within the parallel cutoff; corridor lines do not intersect usefully.
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapRegion {
    pub first: VehicleId,
    pub second: VehicleId,
    pub alpha_deg: f64,
    pub shape: RegionShape,
}

impl OverlapRegion {
    pub fn is_degenerate(&self) -> bool {
        matches!(self.shape, RegionShape::Parallel)
    }

    pub fn corner(&self, q: RegionCorner) -> Option<Vec2> {
        match self.shape {
            RegionShape::Parallelogram { a, b, c, d } => Some([a, b, c, d][q.index()]),
            RegionShape::Parallel => None,
        }
    }

    pub fn polygon(&self) -> Option<[Vec2; 4]> {
        match self.shape {
            RegionShape::Parallelogram { a, b, c, d } => Some([a, b, c, d]),
            RegionShape::Parallel => None,
        }
    }

    pub fn area(&self) -> f64 {
        self.polygon().map_or(0.0, |p| signed_area(&p).abs())
    }

    pub fn centroid(&self) -> Option<Vec2> {
        self.polygon().map(|p| centroid(&p))
    }

    pub fn role_of(&self, vehicle: VehicleId) -> Option<Role> {
        if vehicle == self.first {
            Some(Role::First)
        } else if vehicle == self.second {
            Some(Role::Second)
        } else {
            None
        }
    }
}

/// Orders a pair so the second heading is counter-clockwise of the first.
///
/// Returns the pair and whether the inputs were swapped. Exactly parallel or
/// anti-parallel pairs are ordered by vehicle id, then position.
pub fn canonical_order<'a>(
    s1: &'a KinematicState,
    s2: &'a KinematicState,
) -> (&'a KinematicState, &'a KinematicState, bool) {
    let theta = signed_angle_diff_deg(s1.heading_deg, s2.heading_deg);
    let swap = if theta > 0.0 && theta < 180.0 {
        false
    } else if theta < 0.0 {
        true
    } else {
        let k1 = (s1.vehicle_id, s1.centroid.x, s1.centroid.y);
        let k2 = (s2.vehicle_id, s2.centroid.x, s2.centroid.y);
        k2 < k1
    };
    if swap {
        (s2, s1, true)
    } else {
        (s1, s2, false)
    }
}

/// Unsigned intersecting angle between the two headings, in `[0, 180]`.
pub fn intersecting_angle(s1: &KinematicState, s2: &KinematicState) -> f64 {
    signed_angle_diff_deg(s1.heading_deg, s2.heading_deg).abs()
}

fn side_line(state: &KinematicState, side: Side) -> (Vec2, Vec2) {
    let k = corners(state);
    let p = match side {
        Side::Left => k.a,
        Side::Right => k.b,
    };
    (p, state.direction())
}

/// Intersection of the two vehicles' corridors, with the default parallel cutoff.
pub fn overlap_region(s1: &KinematicState, s2: &KinematicState) -> Result<OverlapRegion> {
    overlap_region_with(s1, s2, DEFAULT_PARALLEL_CUTOFF_DEG)
}

/// Intersection of the two corridors swept forward by each footprint.
///
/// Fails with [`Error::EmptyOverlap`] when the whole region lies behind the
/// rear edge of either vehicle, since neither body can then reach it.
pub fn overlap_region_with(
    s1: &KinematicState,
    s2: &KinematicState,
    parallel_cutoff_deg: f64,
) -> Result<OverlapRegion> {
    s1.validate()?;
    s2.validate()?;
    let (first, second, _) = canonical_order(s1, s2);
    let alpha = intersecting_angle(first, second);
    if alpha < parallel_cutoff_deg || alpha > 180.0 - parallel_cutoff_deg {
        return Ok(OverlapRegion {
            first: first.vehicle_id,
            second: second.vehicle_id,
            alpha_deg: alpha,
            shape: RegionShape::Parallel,
        });
    }
    let meet = |q: RegionCorner| {
        let (side1, side2) = q.sides();
        let (p1, u1) = side_line(first, side1);
        let (p2, u2) = side_line(second, side2);
        line_intersection(p1, u1, p2, u2).ok_or(Error::DegenerateRegion { alpha_deg: alpha })
    };
    let a = meet(RegionCorner::A)?;
    let b = meet(RegionCorner::B)?;
    let c = meet(RegionCorner::C)?;
    let d = meet(RegionCorner::D)?;
    for s in [first, second] {
        let rear = s.rear_center();
        let h = s.direction();
        let ahead = [a, b, c, d]
            .iter()
            .map(|&q| (q - rear).dot(h))
            .fold(f64::NEG_INFINITY, f64::max);
        if ahead < 0.0 {
            return Err(Error::EmptyOverlap);
        }
    }
    Ok(OverlapRegion {
        first: first.vehicle_id,
        second: second.vehicle_id,
        alpha_deg: alpha,
        shape: RegionShape::Parallelogram { a, b, c, d },
    })
}

/// Times at which each footprint corner reaches the region corners on its trace line.
///
/// Times are signed: a negative value means the corner passed that point
/// before the observation instant. [`ArrivalTimes::forward`] gives the
/// forward-only view where such entries become `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrivalTimes {
    pub vehicle: VehicleId,
    pub role: Role,
    times: [[Option<f64>; 4]; 4],
}

impl ArrivalTimes {
    pub fn signed(&self, p: Corner, q: RegionCorner) -> Option<f64> {
        self.times[p.index()][q.index()]
    }

    pub fn forward(&self, p: Corner, q: RegionCorner) -> Option<f64> {
        self.signed(p, q)
            .map(|t| if t < 0.0 { f64::INFINITY } else { t })
    }

    pub(crate) fn at(&self, p: Corner, q: RegionCorner) -> f64 {
        self.signed(p, q)
            .expect("region corner lies on this corner's trace line")
    }

    /// Number of defined (corner, region corner) entries; always 8.
    pub fn defined(&self) -> usize {
        self.times.iter().flatten().filter(|t| t.is_some()).count()
    }
}

pub fn arrival_times(state: &KinematicState, region: &OverlapRegion) -> Result<ArrivalTimes> {
    let role = region
        .role_of(state.vehicle_id)
        .ok_or(Error::UnknownVehicle {
            vehicle: state.vehicle_id.0,
        })?;
    if region.is_degenerate() {
        return Err(Error::DegenerateRegion {
            alpha_deg: region.alpha_deg,
        });
    }
    if state.speed <= 0.0 {
        return Err(Error::ZeroSpeed {
            vehicle: state.vehicle_id.0,
        });
    }
    let k = corners(state);
    let h = state.direction();
    let mut times = [[None; 4]; 4];
    for q in RegionCorner::ALL {
        let point = region.corner(q).expect("non-degenerate region");
        let (side1, side2) = q.sides();
        let side = match role {
            Role::First => side1,
            Role::Second => side2,
        };
        let (front, rear) = side.corners();
        for p in [front, rear] {
            times[p.index()][q.index()] = Some((point - k.get(p)).dot(h) / state.speed);
        }
    }
    Ok(ArrivalTimes {
        vehicle: state.vehicle_id,
        role,
        times,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(id: u64, x: f64, y: f64, heading: f64, speed: f64, l: f64, w: f64) -> KinematicState {
        KinematicState::new(VehicleId(id), Vec2::new(x, y), heading, speed, l, w).unwrap()
    }

    #[test]
    fn perpendicular_unit_corridors_make_unit_square() {
        let s1 = st(1, -5.0, 0.0, 0.0, 1.0, 1.0, 1.0);
        let s2 = st(2, 0.0, -5.0, 90.0, 1.0, 1.0, 1.0);
        let r = overlap_region(&s1, &s2).unwrap();
        assert!(!r.is_degenerate());
        assert!((r.area() - 1.0).abs() < 1e-12);
        assert!((r.alpha_deg - 90.0).abs() < 1e-12);
        let a = r.corner(RegionCorner::A).unwrap();
        // right of vehicle 1 (y = -0.5) and left of vehicle 2 (x = -0.5)
        assert!((a.x + 0.5).abs() < 1e-12 && (a.y + 0.5).abs() < 1e-12);
    }

    #[test]
    fn near_parallel_is_degenerate() {
        let s1 = st(1, 0.0, 0.0, 0.0, 10.0, 4.0, 2.0);
        let s2 = st(2, -10.0, 3.0, 0.1, 10.0, 4.0, 2.0);
        assert!(overlap_region(&s1, &s2).unwrap().is_degenerate());
    }

    #[test]
    fn intersection_behind_is_empty() {
        // paths diverge; corridors cross behind vehicle 1
        let s1 = st(1, 10.0, 0.0, 0.0, 10.0, 4.0, 2.0);
        let s2 = st(2, 10.0, 6.0, 20.0, 10.0, 4.0, 2.0);
        assert!(matches!(overlap_region(&s1, &s2), Err(Error::EmptyOverlap)));
    }

    #[test]
    fn canonical_order_is_argument_independent() {
        let s1 = st(1, 0.0, 0.0, 10.0, 10.0, 4.0, 2.0);
        let s2 = st(2, 0.0, 5.0, 4.0, 10.0, 4.0, 2.0);
        let r12 = overlap_region(&s1, &s2).unwrap();
        let r21 = overlap_region(&s2, &s1).unwrap();
        assert_eq!(r12, r21);
        assert_eq!(r12.first, VehicleId(2));
    }

    #[test]
    fn arrival_time_is_distance_over_speed() {
        // vehicle 1 along +x, right side line y = -1; B starts at (2, -1)
        let s1 = st(1, 0.0, 0.0, 0.0, 3.0, 4.0, 2.0);
        let s2 = st(2, 8.0 + 10.0, -30.0, 90.0, 3.0, 4.0, 2.0);
        let r = overlap_region(&s1, &s2).unwrap();
        let t = arrival_times(&s1, &r).unwrap();
        let a = r.corner(RegionCorner::A).unwrap();
        let expect = (a.x - 2.0) / 3.0;
        assert!((t.at(Corner::FrontRight, RegionCorner::A) - expect).abs() < 1e-12);
        // the rear corner trails the front one by L / v on the same line
        let trail =
            t.at(Corner::RearRight, RegionCorner::A) - t.at(Corner::FrontRight, RegionCorner::A);
        assert!((trail - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(t.defined(), 8);
        assert!(t.signed(Corner::FrontLeft, RegionCorner::A).is_none());
    }

    #[test]
    fn six_metres_at_three_metres_per_second() {
        // B of vehicle 1 sits at (2, -1); region corner a is 6 m ahead on its line.
        let s1 = st(1, 0.0, 0.0, 0.0, 3.0, 4.0, 2.0);
        // vehicle 2 heading 90 with its left line x = 8 meets y = -1 at (8, -1)
        let s2 = st(2, 9.0, -20.0, 90.0, 3.0, 4.0, 2.0);
        let r = overlap_region(&s1, &s2).unwrap();
        let t = arrival_times(&s1, &r).unwrap();
        assert!((t.at(Corner::FrontRight, RegionCorner::A) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn passed_corners_are_infinite_forward() {
        let s1 = st(1, 0.0, 0.0, 0.0, 3.0, 4.0, 2.0);
        let s2 = st(2, 1.0, -20.0, 90.0, 3.0, 4.0, 2.0);
        let r = overlap_region(&s1, &s2).unwrap();
        let t = arrival_times(&s1, &r).unwrap();
        // a is at x = 0 (left line of vehicle 2), behind the front corner at x = 2
        assert!(t.signed(Corner::FrontRight, RegionCorner::A).unwrap() < 0.0);
        assert_eq!(
            t.forward(Corner::FrontRight, RegionCorner::A),
            Some(f64::INFINITY)
        );
    }

    #[test]
    fn zero_speed_has_no_arrival_times() {
        let s1 = st(1, 0.0, 0.0, 0.0, 0.0, 4.0, 2.0);
        let s2 = st(2, 9.0, -20.0, 90.0, 3.0, 4.0, 2.0);
        let r = overlap_region(&s1, &s2).unwrap();
        assert!(matches!(
            arrival_times(&s1, &r),
            Err(Error::ZeroSpeed { .. })
        ));
    }
}
