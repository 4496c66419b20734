//! Brute-force collision referee: advance both rectangles in fixed time steps
//! and report the first step at which a separating-axis test finds overlap.
//!
//! Deliberately shares no code with the kernel beyond the state type.

use serde::{Deserialize, Serialize};

use crate::kernel::KinematicState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub dt: f64,
    pub horizon: f64,
    /// Contacts whose penetration never reaches this depth (m) are grazing.
    pub penetration_tol: f64,
    /// Window (s) after first contact over which penetration is measured.
    pub grazing_window: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            dt: 0.001,
            horizon: 30.0,
            penetration_tol: 0.01,
            grazing_window: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleContact {
    /// First step time with overlap.
    pub time: f64,
    /// Largest penetration depth over the grazing window that follows.
    pub max_penetration: f64,
}

impl OracleContact {
    pub fn is_grazing(&self, config: &OracleConfig) -> bool {
        self.max_penetration < config.penetration_tol
    }
}

type Rect = [(f64, f64); 4];

fn rect_at(s: &KinematicState, t: f64) -> Rect {
    let th = s.heading_deg.to_radians();
    let (hx, hy) = (th.cos(), th.sin());
    let cx = s.centroid.x + hx * s.speed * t;
    let cy = s.centroid.y + hy * s.speed * t;
    let (lx, ly) = (hx * s.length / 2.0, hy * s.length / 2.0);
    let (wx, wy) = (-hy * s.width / 2.0, hx * s.width / 2.0);
    [
        (cx + lx + wx, cy + ly + wy),
        (cx + lx - wx, cy + ly - wy),
        (cx - lx - wx, cy - ly - wy),
        (cx - lx + wx, cy - ly + wy),
    ]
}

/// Smallest projection overlap over the four rectangle axes; positive iff interiors intersect.
fn sat_depth(p: &Rect, q: &Rect) -> f64 {
    let axes = [
        (p[1].0 - p[0].0, p[1].1 - p[0].1),
        (p[3].0 - p[0].0, p[3].1 - p[0].1),
        (q[1].0 - q[0].0, q[1].1 - q[0].1),
        (q[3].0 - q[0].0, q[3].1 - q[0].1),
    ];
    let mut depth = f64::INFINITY;
    for (ax, ay) in axes {
        let len = (ax * ax + ay * ay).sqrt();
        let (ux, uy) = (ax / len, ay / len);
        let span = |r: &Rect| {
            r.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(x, y)| {
                    let d = x * ux + y * uy;
                    (lo.min(d), hi.max(d))
                })
        };
        let (p0, p1) = span(p);
        let (q0, q1) = span(q);
        depth = depth.min(p1.min(q1) - p0.max(q0));
    }
    depth
}

/// Penetration depth of the two footprints at time `t` (non-positive when apart).
pub fn penetration_at(s1: &KinematicState, s2: &KinematicState, t: f64) -> f64 {
    sat_depth(&rect_at(s1, t), &rect_at(s2, t))
}

/// Largest penetration depth sampled every `step` seconds over `[from, from + window]`.
pub fn max_penetration(
    s1: &KinematicState,
    s2: &KinematicState,
    from: f64,
    window: f64,
    step: f64,
) -> f64 {
    let n = (window / step).ceil() as usize;
    (0..=n)
        .map(|j| penetration_at(s1, s2, from + j as f64 * step))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// First contact found by time stepping, with its penetration over the grazing window.
pub fn oracle_contact(
    s1: &KinematicState,
    s2: &KinematicState,
    config: &OracleConfig,
) -> Option<OracleContact> {
    let steps = (config.horizon / config.dt).ceil() as usize;
    for k in 0..=steps {
        let t = k as f64 * config.dt;
        if penetration_at(s1, s2, t) > 0.0 {
            let max_penetration = max_penetration(s1, s2, t, config.grazing_window, config.dt);
            return Some(OracleContact {
                time: t,
                max_penetration,
            });
        }
    }
    None
}

/// Oracle time-to-collision: first overlapping step time, or `+inf` within the horizon.
pub fn oracle_ttc(s1: &KinematicState, s2: &KinematicState, config: &OracleConfig) -> f64 {
    oracle_contact(s1, s2, config).map_or(f64::INFINITY, |c| c.time)
}
