//! Verification machinery: a time-stepping collision oracle, random encounters,
//! synthetic trajectory scenes, and synthetic choice data.

mod choices;
mod oracle;
mod scenario;
mod scene;

pub use choices::{
    simulate_choices, CovariateDist, CovariateSpec, SimulatedChoices, SimulationTruth,
};
pub use oracle::{
    max_penetration, oracle_contact, oracle_ttc, penetration_at, OracleConfig, OracleContact,
};
pub use scenario::{random_encounter, EncounterRanges};
pub use scene::{generate_scene, write_scene, ProfilePoint, SceneSpec, SceneVehicle};
