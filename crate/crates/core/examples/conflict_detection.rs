//! Synthetic trajectories through the detection pipeline: kinematics, pairing,
//! TTC labels and the estimation table.
//!
//!     cargo run --example conflict_detection

use conflict_risk::pipeline::{
    build_observations, derive_kinematics, read_trajectories, summarize_dataset, FormatConfig,
    PipelineConfig, Sampling, ZoneMap,
};
use conflict_risk::report::render_summary;
use conflict_risk::synth::{write_scene, SceneSpec};

const SCENE: &str = include_str!("data/scene.toml");
const ZONES: &str = include_str!("data/zones.toml");

fn main() -> conflict_risk::Result<()> {
    let scene = SceneSpec::from_toml_str(SCENE)?;
    let format = FormatConfig::default();
    let mut csv = Vec::new();
    write_scene(&scene, &mut csv, &format)?;

    let tracks = read_trajectories(csv.as_slice(), &format)?
        .into_iter()
        .map(|t| derive_kinematics(t, scene.fps))
        .collect::<Result<Vec<_>, _>>()?;
    let zones = ZoneMap::from_toml_str(ZONES)?;
    let config = PipelineConfig {
        sampling: Sampling::Stride { frames: 5 },
        ..Default::default()
    };
    let obs = build_observations(&tracks, &zones, &config)?;
    println!("{} tracks, {} observations", tracks.len(), obs.len());
    for o in obs.iter().filter(|o| o.ttc.is_finite()).take(8) {
        println!(
            "frame {:>3} pair {}: {:?} {:?} ttc {:.2} s in {}",
            o.frame, o.group_id, o.family, o.outcome, o.ttc, o.zone
        );
    }
    if !obs.is_empty() {
        print!("\n{}", render_summary(&summarize_dataset(&obs)?));
    }
    Ok(())
}
