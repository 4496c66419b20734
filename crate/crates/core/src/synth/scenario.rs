//! Random two-vehicle encounters for cross-checking the kernel against the oracle.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::kernel::{KinematicState, VehicleId};

use super::oracle::penetration_at;

/// Sampling ranges for [`random_encounter`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncounterRanges {
    pub alpha_deg: (f64, f64),
    pub speed: (f64, f64),
    pub length: (f64, f64),
    pub width: (f64, f64),
    /// Time before the planted near-contact configuration at which the pair starts.
    pub lead_time: (f64, f64),
}

impl Default for EncounterRanges {
    fn default() -> Self {
        Self {
            alpha_deg: (1.0, 9.0),
            speed: (1.0, 25.0),
            length: (2.0, 12.0),
            width: (0.8, 2.6),
            lead_time: (0.5, 8.0),
        }
    }
}

fn draw<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// Samples a pair whose footprints are close together (often touching) after a random
/// lead time, then winds both back to the start. Pairs overlapping at the start are redrawn.
pub fn random_encounter<R: Rng + ?Sized>(
    rng: &mut R,
    ranges: &EncounterRanges,
) -> (KinematicState, KinematicState) {
    loop {
        let h1 = rng.random_range(0.0..360.0);
        let alpha = draw(rng, ranges.alpha_deg);
        let h2 = if rng.random_bool(0.5) {
            h1 + alpha
        } else {
            h1 - alpha
        };
        let (l1, l2) = (draw(rng, ranges.length), draw(rng, ranges.length));
        let (w1, w2) = (draw(rng, ranges.width), draw(rng, ranges.width));
        let (v1, v2) = (draw(rng, ranges.speed), draw(rng, ranges.speed));
        let lead = draw(rng, ranges.lead_time);

        let dir = Vec2::from_heading_deg(h1);
        let along = rng.random_range(-0.6..0.6) * (l1 + l2);
        let across = rng.random_range(-0.75..0.75) * (w1 + w2);
        let meet = Vec2::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
        let c2 = meet + dir * along + dir.left_normal() * across;

        let back1 = meet - Vec2::from_heading_deg(h1) * (v1 * lead);
        let back2 = c2 - Vec2::from_heading_deg(h2) * (v2 * lead);
        let s1 = KinematicState::new(VehicleId(1), back1, h1, v1, l1, w1);
        let s2 = KinematicState::new(VehicleId(2), back2, h2, v2, l2, w2);
        let (Ok(s1), Ok(s2)) = (s1, s2) else { continue };
        if penetration_at(&s1, &s2, 0.0) < 0.0 {
            return (s1, s2);
        }
    }
}
