//! Run configuration shared by every command.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::ConflictType;
use crate::logit::HaltonConfig;
use crate::pipeline::{FormatConfig, PipelineConfig, Sampling};

/// One model to estimate on one conflict family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRun {
    pub name: String,
    pub family: ConflictType,
    pub spec: PathBuf,
}

/// A restricted model tested against the model nesting it, by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparePair {
    #[serde(default)]
    pub label: String,
    pub restricted: String,
    pub full: String,
}

/// Fit statistics entered by hand, e.g. from a published table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredResult {
    pub name: String,
    pub ll: f64,
    pub df: usize,
    #[serde(default)]
    pub ll0: Option<f64>,
    #[serde(default)]
    pub n_obs: Option<usize>,
    #[serde(default)]
    pub reported_aic: Option<f64>,
    #[serde(default)]
    pub reported_r2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlotConfig {
    /// TTC histogram bin width (s).
    pub ttc_bin_width: f64,
}

impl Default for PlotConfig {
    fn default() -> Self {
        Self {
            ttc_bin_width: 0.25,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    /// Scene spec rendered to a trajectory table.
    pub scene: Option<PathBuf>,
    /// Choice-model truth simulated to a choice table.
    pub truth: Option<PathBuf>,
}

/// Everything a run needs. Relative paths are resolved against the directory
/// of the config file.
///
/// ```toml
/// output_dir = "out"
/// seed = 7
/// trajectories = ["tracks.csv"]
/// zones = "zones.toml"
///
/// [pipeline.sampling]
/// mode = "stride"
/// frames = 30
///
/// [[models]]
/// name = "rear_end_correlated"
/// family = "rear_end"
/// spec = "rear_end_correlated.toml"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    /// Seeds scrambled draws and synthetic choice data.
    pub seed: u64,
    pub trajectories: Vec<PathBuf>,
    pub zones: Option<PathBuf>,
    pub format: FormatConfig,
    pub pipeline: PipelineConfig,
    /// Table read by `estimate`; defaults to the observation table `dataset` writes.
    pub dataset: Option<PathBuf>,
    pub models: Vec<ModelRun>,
    /// Replaces the draw settings of every model spec when present.
    pub draws: Option<HaltonConfig>,
    pub compare: Vec<ComparePair>,
    pub stored_results: Vec<StoredResult>,
    pub plot: PlotConfig,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            output_dir: PathBuf::from("out"),
            seed: 0,
            trajectories: Vec::new(),
            zones: None,
            format: FormatConfig::default(),
            pipeline: PipelineConfig::default(),
            dataset: None,
            models: Vec::new(),
            draws: None,
            compare: Vec::new(),
            stored_results: Vec::new(),
            plot: PlotConfig::default(),
            synth: SynthConfig::default(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub draws: Option<usize>,
    pub stride: Option<u32>,
    /// `(slight, severe)` TTC thresholds in seconds.
    pub thresholds: Option<(f64, f64)>,
}

/// Parses `"3.0,1.5"` into slight and severe thresholds.
pub fn parse_thresholds(s: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let parse = |p: &str| {
        p.parse::<f64>()
            .map_err(|_| Error::Config(format!("bad threshold '{p}'")))
    };
    match parts.as_slice() {
        [a, b] => Ok((parse(a)?, parse(b)?)),
        _ => Err(Error::Config(format!(
            "thresholds must be 'slight,severe', got '{s}'"
        ))),
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }

    /// Reads the file and makes every path absolute relative to its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        let mut cfg = Self::from_toml_str(&text)?;
        cfg.rebase(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    pub fn rebase(&mut self, base: &Path) {
        self.output_dir = resolve(base, &self.output_dir);
        for p in &mut self.trajectories {
            *p = resolve(base, p);
        }
        for p in [
            &mut self.zones,
            &mut self.dataset,
            &mut self.synth.scene,
            &mut self.synth.truth,
        ]
        .into_iter()
        .flatten()
        {
            *p = resolve(base, p);
        }
        for m in &mut self.models {
            m.spec = resolve(base, &m.spec);
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(r) = o.draws {
            self.draws.get_or_insert_with(HaltonConfig::default).count = r;
        }
        if let Some(frames) = o.stride {
            self.pipeline.sampling = Sampling::Stride { frames };
        }
        if let Some((slight, severe)) = o.thresholds {
            self.pipeline.thresholds.slight = slight;
            self.pipeline.thresholds.severe = severe;
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pipeline.validate()?;
        if let Some(d) = &self.draws {
            if d.count == 0 {
                return Err(Error::Config("draw count must be at least 1".into()));
            }
        }
        if self.plot.ttc_bin_width.is_nan() || self.plot.ttc_bin_width <= 0.0 {
            return Err(Error::Config("histogram bin width must be positive".into()));
        }
        let mut names = std::collections::HashSet::new();
        for m in &self.models {
            if !names.insert(m.name.as_str()) {
                return Err(Error::Config(format!("duplicate model name '{}'", m.name)));
            }
            if m.family == ConflictType::Unsupported {
                return Err(Error::Config(format!(
                    "model '{}' must target rear_end or sideswipe",
                    m.name
                )));
            }
        }
        Ok(())
    }

    /// Table `estimate` reads.
    pub fn dataset_path(&self) -> PathBuf {
        self.dataset
            .clone()
            .unwrap_or_else(|| self.output_dir.join("observations.csv"))
    }

    /// Fails with `MissingFile` on the first path that does not exist.
    pub fn require(paths: &[&Path]) -> Result<()> {
        match paths.iter().find(|p| !p.exists()) {
            Some(p) => Err(Error::MissingFile(p.to_path_buf())),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let mut cfg =
            RunConfig::from_toml_str("seed = 3\n[pipeline.thresholds]\nslight = 4.0\n").unwrap();
        assert_eq!(cfg.pipeline.thresholds.slight, 4.0);
        assert_eq!(cfg.pipeline.thresholds.severe, 1.5);
        cfg.apply(&Overrides {
            seed: Some(9),
            draws: Some(250),
            stride: Some(15),
            thresholds: Some((2.5, 1.0)),
        });
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.draws.as_ref().unwrap().count, 250);
        assert_eq!(cfg.pipeline.sampling, Sampling::Stride { frames: 15 });
        assert_eq!(cfg.pipeline.thresholds.severe, 1.0);
        cfg.validate().unwrap();
    }

    #[test]
    fn thresholds_must_be_ordered() {
        let mut cfg = RunConfig::default();
        cfg.apply(&Overrides {
            thresholds: Some(parse_thresholds("1.0, 2.0").unwrap()),
            ..Default::default()
        });
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        assert!(parse_thresholds("3").is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml_str("outptu_dir = \"x\"").is_err());
    }

    #[test]
    fn paths_resolve_against_config_dir() {
        let mut cfg = RunConfig::from_toml_str(
            "trajectories = [\"a.csv\", \"/abs/b.csv\"]\nzones = \"z.toml\"\n[[models]]\nname = \"m\"\nfamily = \"rear_end\"\nspec = \"m.toml\"\n",
        )
        .unwrap();
        cfg.rebase(Path::new("/runs/x"));
        assert_eq!(cfg.trajectories[0], PathBuf::from("/runs/x/a.csv"));
        assert_eq!(cfg.trajectories[1], PathBuf::from("/abs/b.csv"));
        assert_eq!(
            cfg.zones.as_ref().unwrap(),
            &PathBuf::from("/runs/x/z.toml")
        );
        assert_eq!(cfg.models[0].spec, PathBuf::from("/runs/x/m.toml"));
        assert_eq!(
            cfg.dataset_path(),
            PathBuf::from("/runs/x/out/observations.csv")
        );
    }
}
