//! Geometric conflict engine for a pair of instantaneous vehicle states.
//!
//! All quantities are SI: metres, seconds, and degrees (headings counter-clockwise from +x).

mod classify;
mod region;
mod state;
mod ttc;

pub use classify::{classify, ConflictSeverity, ConflictType, SeverityThresholds};
pub use region::{
    arrival_times, canonical_order, intersecting_angle, overlap_region, overlap_region_with,
    ArrivalTimes, OverlapRegion, RegionCorner, RegionShape, Role, DEFAULT_PARALLEL_CUTOFF_DEG,
};
pub use state::{corners, Corner, CornerSet, KinematicState, Side, VehicleId};
pub use ttc::{
    longitudinal_ttc, modified_ttc, modified_ttc_with, ttc_longitudinal, ContactBranch,
    ContactClass, KernelConfig, TtcResult,
};
