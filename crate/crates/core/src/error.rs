use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid kinematic state for vehicle {vehicle}: {reason}")]
    InvalidState { vehicle: u64, reason: String },

    #[error("footprints already overlap (time-to-collision would be {ttc:.4} s)")]
    OverlappingInput { ttc: f64 },

    #[error("forward corridors do not intersect ahead of both vehicles")]
    EmptyOverlap,

    #[error("vehicle {vehicle} has zero speed; arrival times are undefined")]
    ZeroSpeed { vehicle: u64 },

    #[error("region is degenerate (paths within {alpha_deg:.3} degrees of parallel)")]
    DegenerateRegion { alpha_deg: f64 },

    #[error("vehicle {vehicle} is not part of this overlap region")]
    UnknownVehicle { vehicle: u64 },

    #[error("schema mismatch at line {line}: {reason}")]
    SchemaMismatch { line: usize, reason: String },

    #[error("frame {frame} of vehicle {vehicle} at line {line} does not advance the track")]
    NonMonotoneFrames {
        vehicle: u64,
        frame: i64,
        line: usize,
    },

    #[error("track of vehicle {vehicle} has {frames} frame(s); at least {required} needed")]
    TooShort {
        vehicle: u64,
        frames: usize,
        required: usize,
    },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("invalid zone map: {0}")]
    InvalidZones(String),

    #[error("non-finite utility for observation {observation}")]
    NonFiniteUtility { observation: usize },

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        got: usize,
    },

    #[error("model is not identified: {0}")]
    Unidentified(String),

    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("optimizer did not converge after {iterations} iterations (gradient max-norm {grad_norm:.3e})")]
    NonConvergence { iterations: usize, grad_norm: f64 },

    #[error("Hessian at the optimum is singular or not negative definite")]
    SingularHessian,

    #[error("random parameter {index} has zero standard deviation")]
    ZeroSigma { index: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),

    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),
}

impl Error {
    pub(crate) fn dim(what: &str, expected: usize, got: usize) -> Self {
        Error::DimensionMismatch {
            what: what.to_string(),
            expected,
            got,
        }
    }
}
