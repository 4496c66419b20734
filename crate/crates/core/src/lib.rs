//! Surrogate-safety analysis of vehicle interactions.
//!
//! * [`kernel`]: footprint-aware two-dimensional time-to-collision and conflict classification.
//! * [`pipeline`]: trajectory ingestion, kinematic features, and labelled interaction observations.
//! * [`logit`]: multinomial and correlated grouped random-parameters logit with heterogeneity in means.
//! * [`synth`]: brute-force collision oracle and synthetic scene and choice generators.
//! * [`report`]: run configuration, command orchestration, and report rendering.

pub mod error;
pub mod geometry;
pub mod kernel;
pub mod logit;
pub mod pipeline;
pub mod report;
pub mod synth;

pub use error::{Error, Result};
