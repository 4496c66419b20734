//! The six commands: each reads a [`RunConfig`] and writes under its output directory.

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::Serialize;

use super::compare::{compare_models, Comparison, ModelSummary};
use super::config::RunConfig;
use super::plot::{trajectory_polylines, ttc_histogram, write_histogram, write_polylines};
use super::render::{render_comparison, render_estimation, render_summary};
use crate::error::{Error, Result};
use crate::kernel::{ConflictSeverity, ConflictType};
use crate::logit::{maximize, ChoiceDataset, EstimationOptions, EstimationResult, ModelSpec};
use crate::pipeline::{
    build_observations, derive_kinematics, load_trajectories, outcome_str, summarize_dataset,
    write_observations, InteractionObservation, VehicleTrack, ZoneMap, ID_COLUMNS,
};
use crate::synth::{simulate_choices, write_scene, SceneSpec, SimulationTruth};

/// Process exit code for an error: 2 configuration, 3 data, 4 convergence, 1 anything else.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::MissingFile(_)
        | Error::InvalidSpec(_)
        | Error::InvalidZones(_)
        | Error::TomlDe(_)
        | Error::TomlSer(_) => 2,
        Error::SchemaMismatch { .. }
        | Error::NonMonotoneFrames { .. }
        | Error::TooShort { .. }
        | Error::Empty(_)
        | Error::Csv(_)
        | Error::Json(_)
        | Error::Unidentified(_)
        | Error::DimensionMismatch { .. }
        | Error::NonFiniteUtility { .. } => 3,
        Error::NonConvergence { .. } | Error::SingularHessian => 4,
        _ => 1,
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CommandOutput {
    pub files: Vec<PathBuf>,
    pub message: String,
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    Ok((path.clone(), BufWriter::new(File::create(&path)?)))
}

fn write_text(dir: &Path, name: &str, text: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    let (path, mut w) = create(dir, name)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    files.push(path);
    Ok(())
}

fn write_json<T: Serialize>(
    dir: &Path,
    name: &str,
    value: &T,
    files: &mut Vec<PathBuf>,
) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(dir, name, &text, files)
}

fn family_name(f: ConflictType) -> &'static str {
    match f {
        ConflictType::RearEnd => "rear_end",
        ConflictType::Sideswipe => "sideswipe",
        ConflictType::Unsupported => "unsupported",
    }
}

/// Loads every trajectory file and derives kinematics. Tracks too short for
/// differencing are skipped with a warning.
pub fn load_tracks(cfg: &RunConfig) -> Result<Vec<VehicleTrack>> {
    if cfg.trajectories.is_empty() {
        return Err(Error::Config("no trajectory files configured".into()));
    }
    let paths: Vec<&Path> = cfg.trajectories.iter().map(PathBuf::as_path).collect();
    RunConfig::require(&paths)?;
    let mut seen = HashSet::new();
    let mut tracks = Vec::new();
    for p in paths {
        for t in load_trajectories(p, &cfg.format)? {
            if !seen.insert(t.vehicle_id) {
                return Err(Error::Config(format!(
                    "vehicle id {} appears in more than one trajectory file",
                    t.vehicle_id
                )));
            }
            match derive_kinematics(t, cfg.pipeline.fps) {
                Ok(t) => tracks.push(t),
                Err(e @ Error::TooShort { .. }) => warn!("skipping track: {e}"),
                Err(e) => return Err(e),
            }
        }
    }
    tracks.sort_by_key(|t| t.vehicle_id);
    Ok(tracks)
}

fn load_zones(cfg: &RunConfig) -> Result<ZoneMap> {
    let path = cfg
        .zones
        .as_ref()
        .ok_or_else(|| Error::Config("no zone map configured".into()))?;
    ZoneMap::load(path)
}

/// Tracks and labelled observations for the configured inputs.
pub fn run_pipeline(cfg: &RunConfig) -> Result<(Vec<VehicleTrack>, Vec<InteractionObservation>)> {
    cfg.validate()?;
    let zones = load_zones(cfg)?;
    let tracks = load_tracks(cfg)?;
    let obs = build_observations(&tracks, &zones, &cfg.pipeline)?;
    info!("{} tracks, {} observations", tracks.len(), obs.len());
    Ok((tracks, obs))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct ConflictCounts {
    family: &'static str,
    none: usize,
    slight: usize,
    severe: usize,
}

fn conflict_counts(obs: &[InteractionObservation]) -> Vec<ConflictCounts> {
    [ConflictType::RearEnd, ConflictType::Sideswipe]
        .into_iter()
        .map(|f| {
            let count = |s: ConflictSeverity| {
                obs.iter()
                    .filter(|o| o.family == f && o.outcome == s)
                    .count()
            };
            ConflictCounts {
                family: family_name(f),
                none: count(ConflictSeverity::None),
                slight: count(ConflictSeverity::Slight),
                severe: count(ConflictSeverity::Severe),
            }
        })
        .collect()
}

/// Conflict table (pair, frame, family, severity, TTC, zone) and counts per family.
pub fn cmd_detect(cfg: &RunConfig) -> Result<CommandOutput> {
    let (_, obs) = run_pipeline(cfg)?;
    let mut files = Vec::new();
    let (path, w) = create(&cfg.output_dir, "conflicts.csv")?;
    let mut w = csv::Writer::from_writer(w);
    w.write_record(ID_COLUMNS)?;
    for o in &obs {
        w.write_record([
            o.group_id.to_string(),
            o.frame.to_string(),
            family_name(o.family).to_string(),
            outcome_str(o.outcome).to_string(),
            o.ttc.to_string(),
            o.leader.vehicle_id.to_string(),
            o.follower.vehicle_id.to_string(),
            o.conflict_point.x.to_string(),
            o.conflict_point.y.to_string(),
            o.zone.to_string(),
        ])?;
    }
    w.flush()?;
    files.push(path);
    let counts = conflict_counts(&obs);
    let mut text = String::from("family      none  slight  severe\n");
    for c in &counts {
        text.push_str(&format!(
            "{:<10} {:>5} {:>7} {:>7}\n",
            c.family, c.none, c.slight, c.severe
        ));
    }
    write_text(&cfg.output_dir, "conflict_summary.txt", &text, &mut files)?;
    write_json(
        &cfg.output_dir,
        "conflict_summary.json",
        &counts,
        &mut files,
    )?;
    Ok(CommandOutput {
        files,
        message: format!("{} interaction observations\n{text}", obs.len()),
    })
}

/// Observation table with covariates for estimation, plus descriptive statistics.
pub fn cmd_dataset(cfg: &RunConfig) -> Result<CommandOutput> {
    let (_, obs) = run_pipeline(cfg)?;
    let mut files = Vec::new();
    let (path, mut w) = create(&cfg.output_dir, "observations.csv")?;
    write_observations(&mut w, &obs)?;
    w.flush()?;
    files.push(path);
    let message = if obs.is_empty() {
        "no observations; summary skipped".to_string()
    } else {
        let summary = summarize_dataset(&obs)?;
        let text = render_summary(&summary);
        write_text(&cfg.output_dir, "dataset_summary.txt", &text, &mut files)?;
        write_json(
            &cfg.output_dir,
            "dataset_summary.json",
            &summary,
            &mut files,
        )?;
        text
    };
    Ok(CommandOutput { files, message })
}

/// Reads the observation table, restricted to `family` when it has a family column.
pub fn load_choice_data(path: &Path, family: ConflictType) -> Result<ChoiceDataset> {
    RunConfig::require(&[path])?;
    let mut rdr = csv::Reader::from_path(path)?;
    let has_family = rdr.headers()?.iter().any(|h| h.trim() == "family");
    let filter = has_family.then(|| family_name(family));
    let group_col = "group_id";
    ChoiceDataset::read_csv(File::open(path)?, "outcome", group_col, filter)
}

/// Fits every configured model; one JSON and one text report per model.
pub fn cmd_estimate(cfg: &RunConfig) -> Result<CommandOutput> {
    cfg.validate()?;
    if cfg.models.is_empty() {
        return Err(Error::Config("no models configured".into()));
    }
    let data_path = cfg.dataset_path();
    let specs: Vec<&Path> = cfg.models.iter().map(|m| m.spec.as_path()).collect();
    RunConfig::require(&[&[data_path.as_path()], specs.as_slice()].concat())?;
    let mut files = Vec::new();
    let mut message = String::new();
    for m in &cfg.models {
        let mut spec = ModelSpec::load(&m.spec)?;
        if spec.name.is_empty() {
            spec.name = m.name.clone();
        }
        if let Some(d) = &cfg.draws {
            spec.draws = d.clone();
        }
        spec.draws.seed = cfg.seed;
        let data = load_choice_data(&data_path, m.family)?;
        let result = maximize(&data, &spec, &EstimationOptions::default())?;
        let text = render_estimation(&result);
        write_json(
            &cfg.output_dir,
            &format!("{}.json", m.name),
            &result,
            &mut files,
        )?;
        write_text(
            &cfg.output_dir,
            &format!("{}.txt", m.name),
            &text,
            &mut files,
        )?;
        message.push_str(&text);
        message.push('\n');
    }
    Ok(CommandOutput { files, message })
}

fn summary_by_name(cfg: &RunConfig, name: &str) -> Result<ModelSummary> {
    if let Some(s) = cfg.stored_results.iter().find(|s| s.name == name) {
        return Ok(ModelSummary::from_stored(s));
    }
    let path = cfg.output_dir.join(format!("{name}.json"));
    RunConfig::require(&[&path])?;
    let result: EstimationResult = serde_json::from_str(&fs::read_to_string(&path)?)?;
    let mut s = ModelSummary::from_result(&result);
    s.name = name.to_string();
    Ok(s)
}

/// Likelihood-ratio comparison of every configured pair.
pub fn cmd_compare(cfg: &RunConfig) -> Result<CommandOutput> {
    if cfg.compare.is_empty() {
        return Err(Error::Config("no comparisons configured".into()));
    }
    let comparisons = cfg
        .compare
        .iter()
        .map(|p| {
            let label = if p.label.is_empty() {
                format!("{} vs {}", p.restricted, p.full)
            } else {
                p.label.clone()
            };
            Ok(compare_models(
                &label,
                summary_by_name(cfg, &p.restricted)?,
                summary_by_name(cfg, &p.full)?,
            ))
        })
        .collect::<Result<Vec<Comparison>>>()?;
    let text = render_comparison(&comparisons);
    let mut files = Vec::new();
    write_text(&cfg.output_dir, "comparison.txt", &text, &mut files)?;
    write_json(&cfg.output_dir, "comparison.json", &comparisons, &mut files)?;
    Ok(CommandOutput {
        files,
        message: text,
    })
}

/// Trajectory polylines by payment type and TTC histograms as delimited tables.
pub fn cmd_plot(cfg: &RunConfig) -> Result<CommandOutput> {
    let (tracks, obs) = run_pipeline(cfg)?;
    let groups = trajectory_polylines(&tracks)?;
    let mut files = Vec::new();
    let (path, mut w) = create(&cfg.output_dir, "trajectories_by_payment.csv")?;
    write_polylines(&mut w, &groups)?;
    w.flush()?;
    files.push(path);
    let mut message = format!("{} polyline groups", groups.len());
    if obs.is_empty() {
        message.push_str("; no observations, histogram skipped");
    } else {
        let bins = ttc_histogram(&obs, cfg.plot.ttc_bin_width)?;
        let (path, mut w) = create(&cfg.output_dir, "ttc_histogram.csv")?;
        write_histogram(&mut w, &bins)?;
        w.flush()?;
        files.push(path);
        message.push_str(&format!("; {} histogram bins", bins.len()));
    }
    Ok(CommandOutput { files, message })
}

#[derive(Debug, Serialize)]
struct TruthRecord<'a> {
    params: &'a [f64],
    seed: u64,
    omega: &'a [Vec<f64>],
}

/// Renders the configured scene and/or simulates the configured choice truth.
pub fn cmd_synth(cfg: &RunConfig) -> Result<CommandOutput> {
    let mut files = Vec::new();
    let mut message = String::new();
    if cfg.synth.scene.is_none() && cfg.synth.truth.is_none() {
        return Err(Error::Config("synth needs a scene or a truth file".into()));
    }
    if let Some(p) = &cfg.synth.scene {
        RunConfig::require(&[p])?;
        let spec = SceneSpec::from_toml_str(&fs::read_to_string(p)?)?;
        let (path, mut w) = create(&cfg.output_dir, "synthetic_trajectories.csv")?;
        write_scene(&spec, &mut w, &cfg.format)?;
        w.flush()?;
        files.push(path);
        message.push_str(&format!("scene with {} vehicles\n", spec.vehicles.len()));
    }
    if let Some(p) = &cfg.synth.truth {
        RunConfig::require(&[p])?;
        let mut truth: SimulationTruth = toml::from_str(&fs::read_to_string(p)?)?;
        truth.seed = cfg.seed;
        let sim = simulate_choices(&truth)?;
        let (path, mut w) = create(&cfg.output_dir, "synthetic_choices.csv")?;
        sim.dataset.write_csv(&mut w)?;
        w.flush()?;
        files.push(path);
        write_json(
            &cfg.output_dir,
            "synthetic_truth.json",
            &TruthRecord {
                params: &truth.params,
                seed: truth.seed,
                omega: &sim.omega,
            },
            &mut files,
        )?;
        message.push_str(&format!(
            "{} choices in {} groups\n",
            sim.dataset.len(),
            sim.dataset.n_groups()
        ));
    }
    Ok(CommandOutput { files, message })
}
