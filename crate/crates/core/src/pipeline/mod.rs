//! From frame-level trajectories to labelled interaction observations.

mod io;
mod kinematics;
mod observations;
mod summary;
mod zones;

pub use io::{
    load_trajectories, read_trajectories, write_trajectories, ColumnMap, FormatConfig, Payment,
    TrajectoryFrame, VehicleClass,
};
pub use kinematics::{derive_kinematics, Kinematics, VehicleTrack};
pub use observations::{
    build_observations, outcome_str, pair_candidates, write_observations, CongestionFilterConfig,
    GroupId, InteractionObservation, PipelineConfig, RoleCovariates, Sampling, COVARIATE_NAMES,
    ID_COLUMNS,
};
pub use summary::{summarize_dataset, DatasetSummary, FamilySummary, SummaryRow};
pub use zones::{assign_zone, Zone, ZoneLabel, ZoneMap};
