//! Longitudinal and footprint-aware two-dimensional time-to-collision.

use serde::{Deserialize, Serialize};

use super::region::{
    arrival_times, canonical_order, intersecting_angle, overlap_region_with, ArrivalTimes,
    RegionCorner, DEFAULT_PARALLEL_CUTOFF_DEG,
};
use super::state::{corners, Corner, KinematicState, VehicleId};
use crate::error::{Error, Result};
use crate::geometry::{convex_penetration, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelConfig {
    /// Headings closer than this (degrees) are treated as parallel paths.
    pub parallel_cutoff_deg: f64,
    /// Tolerance (seconds) of the equal-arrival-time branches.
    pub equal_time_tol: f64,
    /// Interpolation denominators below this magnitude (seconds) are degenerate.
    pub denominator_tol: f64,
    /// From this angle on, paths converge head-on enough for front-to-front
    /// contact, which the region tree does not cover; such pairs are swept exactly.
    pub region_max_angle_deg: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            parallel_cutoff_deg: DEFAULT_PARALLEL_CUTOFF_DEG,
            equal_time_tol: 1e-9,
            denominator_tol: 1e-9,
            region_max_angle_deg: 90.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactClass {
    FrontToRear,
    CornerToSide,
    None,
}

/// Which contact the decision tree predicted.
///
/// "First" and "second" refer to the canonical order of the overlap region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactBranch {
    /// Front-left corner of the second vehicle strikes the right side of the first at `a`.
    SecondCornerOnFirstSide,
    /// Front-right corner of the first vehicle strikes the left side of the second at `a`.
    FirstCornerOnSecondSide,
    /// Front-right corner of the second vehicle strikes the rear of the first.
    SecondFrontOnFirstRear,
    /// Rear-right corner of the first vehicle is struck by the front of the second.
    FirstRearOnSecondFront,
    /// Front-left corner of the first vehicle strikes the rear of the second.
    FirstFrontOnSecondRear,
    /// Rear-left corner of the second vehicle is struck by the front of the first.
    SecondRearOnFirstFront,
    /// Two corners reach the same region corner at the same time.
    SimultaneousCorners,
    /// Near-parallel paths evaluated with the longitudinal formula.
    Longitudinal,
    /// One vehicle is stationary.
    StaticObstacle,
    /// Obtuse or opposing paths, solved by exact sweeping.
    Opposing,
    NoContact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TtcResult {
    /// Seconds until first contact; `+inf` when no contact is predicted.
    pub ttc: f64,
    pub leader_id: VehicleId,
    pub follower_id: VehicleId,
    pub contact_class: ContactClass,
    pub alpha_deg: f64,
    pub branch: ContactBranch,
    /// Centroid of the overlap region, or the gap midpoint for parallel paths.
    pub conflict_point: Option<Vec2>,
}

impl TtcResult {
    pub fn is_finite(&self) -> bool {
        self.ttc.is_finite()
    }
}

/// Eq. (1) style longitudinal TTC on scalar positions along a shared axis.
///
/// `leader_front` and `follower_front` are front bumper displacements.
pub fn longitudinal_ttc(
    leader_front: f64,
    follower_front: f64,
    leader_length: f64,
    leader_speed: f64,
    follower_speed: f64,
) -> Result<f64> {
    if follower_speed <= leader_speed {
        return Ok(f64::INFINITY);
    }
    let ttc = (leader_front - follower_front - leader_length) / (follower_speed - leader_speed);
    if ttc < 0.0 {
        return Err(Error::OverlappingInput { ttc });
    }
    Ok(ttc)
}

fn shared_axis(a: &KinematicState, b: &KinematicState) -> Vec2 {
    let sum = a.direction() + b.direction();
    let n = sum.norm();
    if n < 1e-9 {
        a.direction()
    } else {
        sum * (1.0 / n)
    }
}

/// Longitudinal TTC for two near-parallel vehicles projected on their shared axis.
pub fn ttc_longitudinal(leader: &KinematicState, follower: &KinematicState) -> Result<f64> {
    leader.validate()?;
    follower.validate()?;
    let axis = shared_axis(leader, follower);
    longitudinal_ttc(
        leader.front_center().dot(axis),
        follower.front_center().dot(axis),
        leader.length * leader.direction().dot(axis),
        leader.velocity().dot(axis),
        follower.velocity().dot(axis),
    )
}

/// Modified TTC with default kernel settings.
pub fn modified_ttc(s1: &KinematicState, s2: &KinematicState) -> Result<TtcResult> {
    modified_ttc_with(s1, s2, &KernelConfig::default())
}

/// Predicted first-contact time of two footprints under constant speed and heading.
pub fn modified_ttc_with(
    s1: &KinematicState,
    s2: &KinematicState,
    config: &KernelConfig,
) -> Result<TtcResult> {
    s1.validate()?;
    s2.validate()?;
    let (first, second, _) = canonical_order(s1, s2);
    let alpha = intersecting_angle(first, second);
    if overlapping_now(first, second) {
        return Err(Error::OverlappingInput { ttc: 0.0 });
    }

    if first.speed == 0.0 || second.speed == 0.0 {
        return static_contact(first, second, alpha);
    }
    if alpha < config.parallel_cutoff_deg {
        return parallel_contact(first, second, alpha);
    }
    if alpha >= config.region_max_angle_deg {
        return opposing_contact(first, second, alpha);
    }

    let region = match overlap_region_with(first, second, config.parallel_cutoff_deg) {
        Ok(r) => r,
        Err(Error::EmptyOverlap) => return Ok(no_contact(first, second, alpha, None)),
        Err(e) => return Err(e),
    };
    let times1 = arrival_times(first, &region)?;
    let times2 = arrival_times(second, &region)?;
    let leaf = decide(&TreeTimes::new(&times1, &times2), config);

    let (leader, follower) = if leaf.first_leads {
        (first, second)
    } else {
        (second, first)
    };
    let point = region.centroid();
    if !leaf.ttc.is_finite() {
        return Ok(TtcResult {
            ttc: f64::INFINITY,
            leader_id: leader.vehicle_id,
            follower_id: follower.vehicle_id,
            contact_class: ContactClass::None,
            alpha_deg: alpha,
            branch: ContactBranch::NoContact,
            conflict_point: point,
        });
    }
    if leaf.ttc <= 0.0 {
        // contact interval lies in the past; the pair is separating
        return Ok(no_contact(leader, follower, alpha, point));
    }
    Ok(TtcResult {
        ttc: leaf.ttc,
        leader_id: leader.vehicle_id,
        follower_id: follower.vehicle_id,
        contact_class: leaf.class,
        alpha_deg: alpha,
        branch: leaf.branch,
        conflict_point: point,
    })
}

fn no_contact(
    leader: &KinematicState,
    follower: &KinematicState,
    alpha: f64,
    point: Option<Vec2>,
) -> TtcResult {
    TtcResult {
        ttc: f64::INFINITY,
        leader_id: leader.vehicle_id,
        follower_id: follower.vehicle_id,
        contact_class: ContactClass::None,
        alpha_deg: alpha,
        branch: ContactBranch::NoContact,
        conflict_point: point,
    }
}

fn overlapping_now(s1: &KinematicState, s2: &KinematicState) -> bool {
    convex_penetration(&corners(s1).polygon(), &corners(s2).polygon()) > 1e-9
}

/// Arrival times named after the corners of the decision tree.
///
/// `t1b_a` is the time the first vehicle's front corner on the line through
/// `a` (its front-right, B) reaches `a`, and so on for the other entries.
#[derive(Debug, Clone, Copy)]
struct TreeTimes {
    t1b_a: f64,
    t1c_a: f64,
    t1c_d: f64,
    t1d_c: f64,
    t1a_b: f64,
    t1a_c: f64,
    t2a_a: f64,
    t2d_a: f64,
    t2d_b: f64,
    t2b_d: f64,
    t2b_c: f64,
    t2c_c: f64,
}

impl TreeTimes {
    fn new(first: &ArrivalTimes, second: &ArrivalTimes) -> Self {
        use Corner::*;
        use RegionCorner as Q;
        Self {
            t1b_a: first.at(FrontRight, Q::A),
            t1c_a: first.at(RearRight, Q::A),
            t1c_d: first.at(RearRight, Q::D),
            t1d_c: first.at(RearLeft, Q::C),
            t1a_b: first.at(FrontLeft, Q::B),
            t1a_c: first.at(FrontLeft, Q::C),
            t2a_a: second.at(FrontLeft, Q::A),
            t2d_a: second.at(RearLeft, Q::A),
            t2d_b: second.at(RearLeft, Q::B),
            t2b_d: second.at(FrontRight, Q::D),
            t2b_c: second.at(FrontRight, Q::C),
            t2c_c: second.at(RearRight, Q::C),
        }
    }
}

struct Leaf {
    ttc: f64,
    branch: ContactBranch,
    class: ContactClass,
    first_leads: bool,
}

/// Meeting time of a corner travelling along a region edge and the edge of
/// the other vehicle sweeping the same segment.
///
/// Both move linearly in time along the segment: the corner is at the two
/// segment ends at `c0`, `c1` and the sweeping edge at `e0`, `e1`.
fn crossing(c0: f64, c1: f64, e0: f64, e1: f64, tol: f64) -> f64 {
    let denom = c0 + e1 - e0 - c1;
    if denom.abs() < tol {
        return c0.min(e0);
    }
    (c0 * e1 - e0 * c1) / denom
}

fn decide(t: &TreeTimes, config: &KernelConfig) -> Leaf {
    let tol = config.equal_time_tol;
    let dtol = config.denominator_tol;
    let eq = |x: f64, y: f64| (x - y).abs() <= tol;
    let leaf = |ttc, branch, class, first_leads| Leaf {
        ttc,
        branch,
        class,
        first_leads,
    };
    use ContactBranch as B;
    use ContactClass as K;

    if eq(t.t1b_a, t.t2a_a) {
        return leaf(t.t1b_a, B::SimultaneousCorners, K::FrontToRear, true);
    }
    if t.t1b_a < t.t2a_a {
        // first vehicle reaches the region first
        if eq(t.t1c_a, t.t2a_a) {
            return leaf(t.t2a_a, B::SimultaneousCorners, K::FrontToRear, true);
        }
        if t.t1c_a > t.t2a_a {
            return leaf(t.t2a_a, B::SecondCornerOnFirstSide, K::CornerToSide, true);
        }
        if eq(t.t1c_d, t.t2b_d) {
            return leaf(t.t2b_d, B::SimultaneousCorners, K::FrontToRear, true);
        }
        if t.t1c_d < t.t2b_d {
            if eq(t.t1d_c, t.t2b_c) {
                return leaf(t.t2b_c, B::SimultaneousCorners, K::FrontToRear, true);
            }
            if t.t1d_c > t.t2b_c {
                let ttc = crossing(t.t2b_d, t.t2b_c, t.t1c_d, t.t1d_c, dtol);
                return leaf(ttc, B::SecondFrontOnFirstRear, K::FrontToRear, true);
            }
            return leaf(f64::INFINITY, B::NoContact, K::None, true);
        }
        let ttc = crossing(t.t1c_a, t.t1c_d, t.t2a_a, t.t2b_d, dtol);
        return leaf(ttc, B::FirstRearOnSecondFront, K::FrontToRear, true);
    }
    // second vehicle reaches the region first
    if eq(t.t1b_a, t.t2d_a) {
        return leaf(t.t1b_a, B::SimultaneousCorners, K::FrontToRear, false);
    }
    if t.t1b_a < t.t2d_a {
        return leaf(t.t1b_a, B::FirstCornerOnSecondSide, K::CornerToSide, false);
    }
    if eq(t.t1a_b, t.t2d_b) {
        return leaf(t.t1a_b, B::SimultaneousCorners, K::FrontToRear, false);
    }
    if t.t1a_b > t.t2d_b {
        if eq(t.t1a_c, t.t2c_c) {
            return leaf(t.t1a_c, B::SimultaneousCorners, K::FrontToRear, false);
        }
        if t.t1a_c < t.t2c_c {
            let ttc = crossing(t.t1a_b, t.t1a_c, t.t2d_b, t.t2c_c, dtol);
            return leaf(ttc, B::FirstFrontOnSecondRear, K::FrontToRear, false);
        }
        return leaf(f64::INFINITY, B::NoContact, K::None, false);
    }
    let ttc = crossing(t.t2d_a, t.t2d_b, t.t1b_a, t.t1a_b, dtol);
    leaf(ttc, B::SecondRearOnFirstFront, K::FrontToRear, false)
}

fn parallel_contact(
    first: &KinematicState,
    second: &KinematicState,
    alpha: f64,
) -> Result<TtcResult> {
    let axis = shared_axis(first, second);
    let lateral = axis.left_normal();
    let offset = (second.centroid - first.centroid).dot(lateral).abs();
    let (leader, follower) = if second.centroid.dot(axis) > first.centroid.dot(axis) {
        (second, first)
    } else {
        (first, second)
    };
    let gap_mid = (leader.rear_center() + follower.front_center()) * 0.5;
    if offset >= 0.5 * (first.width + second.width) {
        return Ok(no_contact(leader, follower, alpha, Some(gap_mid)));
    }
    let ttc = ttc_longitudinal(leader, follower)?;
    let (class, branch) = if ttc.is_finite() {
        (ContactClass::FrontToRear, ContactBranch::Longitudinal)
    } else {
        (ContactClass::None, ContactBranch::NoContact)
    };
    Ok(TtcResult {
        ttc,
        leader_id: leader.vehicle_id,
        follower_id: follower.vehicle_id,
        contact_class: class,
        alpha_deg: alpha,
        branch,
        conflict_point: Some(gap_mid),
    })
}

/// First time a corner of `mover` enters `target`, with relative velocity `rel`,
/// and whether it entered through the target's front or rear face.
fn corner_entry(mover: &KinematicState, target: &KinematicState, rel: Vec2) -> Option<(f64, bool)> {
    let h = target.direction();
    let n = h.left_normal();
    let (u_x, u_y) = (rel.dot(h), rel.dot(n));
    let half = [0.5 * target.length, 0.5 * target.width];
    let k = corners(mover);
    let mut best: Option<(f64, bool)> = None;
    for p in Corner::ALL {
        let local = k.get(p) - target.centroid;
        let pos = [local.dot(h), local.dot(n)];
        let vel = [u_x, u_y];
        let mut enter = f64::NEG_INFINITY;
        let mut exit = f64::INFINITY;
        let mut via_end_face = false;
        let mut empty = false;
        for axis in 0..2 {
            if vel[axis] == 0.0 {
                if pos[axis].abs() > half[axis] {
                    empty = true;
                }
                continue;
            }
            let t0 = (-half[axis] - pos[axis]) / vel[axis];
            let t1 = (half[axis] - pos[axis]) / vel[axis];
            let (lo, hi) = if t0 < t1 { (t0, t1) } else { (t1, t0) };
            if lo > enter {
                enter = lo;
                via_end_face = axis == 0;
            }
            exit = exit.min(hi);
        }
        if empty || enter > exit || enter < 0.0 || !enter.is_finite() {
            continue;
        }
        if best.is_none_or(|(t, _)| enter < t) {
            best = Some((enter, via_end_face));
        }
    }
    best
}

/// Exact swept contact between two footprints, used where the region tree does not apply.
fn swept_contact(s1: &KinematicState, s2: &KinematicState) -> Option<(f64, ContactClass)> {
    let rel12 = s1.velocity() - s2.velocity();
    let a = corner_entry(s1, s2, rel12);
    let b = corner_entry(s2, s1, -rel12);
    let pick = match (a, b) {
        (Some(x), Some(y)) => Some(if x.0 <= y.0 { x } else { y }),
        (x, y) => x.or(y),
    };
    pick.map(|(t, end_face)| {
        let class = if end_face {
            ContactClass::FrontToRear
        } else {
            ContactClass::CornerToSide
        };
        (t, class)
    })
}

fn static_contact(
    first: &KinematicState,
    second: &KinematicState,
    alpha: f64,
) -> Result<TtcResult> {
    // the stationary vehicle already occupies the shared area, so it leads
    let (leader, follower) = if first.speed == 0.0 {
        (first, second)
    } else {
        (second, first)
    };
    let point = Some(leader.centroid);
    if follower.speed == 0.0 {
        return Ok(no_contact(leader, follower, alpha, point));
    }
    match swept_contact(first, second) {
        Some((ttc, class)) if ttc > 0.0 => Ok(TtcResult {
            ttc,
            leader_id: leader.vehicle_id,
            follower_id: follower.vehicle_id,
            contact_class: class,
            alpha_deg: alpha,
            branch: ContactBranch::StaticObstacle,
            conflict_point: point,
        }),
        _ => Ok(no_contact(leader, follower, alpha, point)),
    }
}

fn opposing_contact(
    first: &KinematicState,
    second: &KinematicState,
    alpha: f64,
) -> Result<TtcResult> {
    let point = Some((first.centroid + second.centroid) * 0.5);
    match swept_contact(first, second) {
        Some((ttc, class)) if ttc > 0.0 => Ok(TtcResult {
            ttc,
            leader_id: first.vehicle_id,
            follower_id: second.vehicle_id,
            contact_class: class,
            alpha_deg: alpha,
            branch: ContactBranch::Opposing,
            conflict_point: point,
        }),
        _ => Ok(no_contact(first, second, alpha, point)),
    }
}
