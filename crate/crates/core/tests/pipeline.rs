use conflict_risk::geometry::Vec2;
use conflict_risk::kernel::{
    ConflictSeverity, ConflictType, KinematicState, SeverityThresholds, VehicleId,
};
use conflict_risk::pipeline::{
    build_observations, derive_kinematics, read_trajectories, summarize_dataset,
    write_observations, CongestionFilterConfig, FormatConfig, PipelineConfig, Sampling,
    VehicleClass, VehicleTrack, ZoneMap,
};
use conflict_risk::synth::{oracle_ttc, write_scene, OracleConfig, SceneSpec};

const ZONES: &str = r#"
study_area = [[-200, -100], [200, -100], [200, 100], [-200, 100]]

[[zones]]
name = "Zone 1"
polygon = [[-200, -100], [0, -100], [0, 100], [-200, 100]]

[[zones]]
name = "Zone 2"
polygon = [[0, -100], [100, -100], [100, 100], [0, 100]]

[[zones]]
name = "Zone 3"
polygon = [[100, -100], [200, -100], [200, 100], [100, 100]]
"#;

// Vehicle 1 drives along +x at 10 m/s from (-20, 0). Vehicle 2, a goods vehicle at 8 degrees,
// has its front-left corner on vehicle 1's right side at (21, -1) at t = 4 + 1/60 s,
// half a frame past 4 s so no sampled TTC lands exactly on a threshold.
fn crossing_scene() -> SceneSpec {
    let t = 4.0 + 1.0 / 60.0;
    let h2 = Vec2::from_heading_deg(8.0);
    let corner = Vec2::new(21.0 - 10.0 * (t - 4.0), -1.0);
    let c2 = corner - h2 * 2.0 - h2.left_normal() * 1.0 - h2 * (10.0 * t);
    SceneSpec::from_toml_str(&format!(
        r#"
frames = 150
[[vehicles]]
id = 1
centroid = [{x1}, 0]
heading = 0
speed = 10
length = 4
width = 2

[[vehicles]]
id = 2
centroid = [{x2}, {y2}]
heading = 8
speed = 10
length = 4
width = 2
class = "goods_vehicle"
payment = "electronic"
"#,
        x1 = -20.0 - 10.0 * (t - 4.0),
        x2 = c2.x,
        y2 = c2.y
    ))
    .unwrap()
}

fn tracks_of(spec: &SceneSpec) -> Vec<VehicleTrack> {
    let mut buf = Vec::new();
    write_scene(spec, &mut buf, &FormatConfig::default()).unwrap();
    read_trajectories(buf.as_slice(), &FormatConfig::default())
        .unwrap()
        .into_iter()
        .map(|t| derive_kinematics(t, 30).unwrap())
        .collect()
}

fn per_frame() -> PipelineConfig {
    PipelineConfig {
        sampling: Sampling::PerFrame,
        ..Default::default()
    }
}

fn state(t: &VehicleTrack, frame: i64, speed: f64) -> KinematicState {
    let f = t.frames[t.index_of(frame).unwrap()];
    KinematicState::new(
        t.vehicle_id,
        f.centroid,
        f.heading.unwrap(),
        speed,
        f.length,
        f.width,
    )
    .unwrap()
}

#[test]
fn crossing_scene_matches_oracle_enumeration() {
    let tracks = tracks_of(&crossing_scene());
    let zones = ZoneMap::from_toml_str(ZONES).unwrap();
    let obs = build_observations(&tracks, &zones, &per_frame()).unwrap();

    // hand enumeration: oracle TTC of every frame with a full second of history
    let thresholds = SeverityThresholds::default();
    let cfg = OracleConfig::default();
    let mut expected = Vec::new();
    for frame in 30..150 {
        let (a, b) = (
            state(&tracks[0], frame, 10.0),
            state(&tracks[1], frame, 10.0),
        );
        let t = oracle_ttc(&a, &b, &cfg);
        if t > 0.0 && t.is_finite() {
            expected.push((frame, thresholds.severity(t)));
        }
    }
    assert!(expected.len() > 80);
    let got: Vec<_> = obs.iter().map(|o| (o.frame, o.outcome)).collect();
    assert_eq!(got, expected);

    let first_severe = obs
        .iter()
        .find(|o| o.outcome == ConflictSeverity::Severe)
        .unwrap();
    assert!(first_severe.ttc < 1.5);
    let before = obs
        .iter()
        .find(|o| o.frame == first_severe.frame - 1)
        .unwrap();
    assert!(before.ttc >= 1.5);

    for o in &obs {
        assert_eq!(o.family, ConflictType::Sideswipe);
        assert!(o.electronic_involved);
        let goods = [&o.leader, &o.follower]
            .iter()
            .find(|r| r.vehicle_id == VehicleId(2))
            .unwrap()
            .class;
        assert_eq!(goods, VehicleClass::GoodsVehicle);
        assert_eq!(o.zone, 2);
        assert_eq!(o.covariate("zone2"), Some(1.0));
    }
}

#[test]
fn stride_keeps_the_smallest_ttc_per_block() {
    let tracks = tracks_of(&crossing_scene());
    let zones = ZoneMap::from_toml_str(ZONES).unwrap();
    let all = build_observations(&tracks, &zones, &per_frame()).unwrap();
    let strided = build_observations(&tracks, &zones, &PipelineConfig::default()).unwrap();
    assert!(!strided.is_empty());
    for o in &strided {
        let block = o.frame.div_euclid(30);
        let min = all
            .iter()
            .filter(|a| a.frame.div_euclid(30) == block)
            .map(|a| a.ttc)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(o.ttc, min);
    }
    let blocks: Vec<i64> = strided.iter().map(|o| o.frame.div_euclid(30)).collect();
    let mut dedup = blocks.clone();
    dedup.dedup();
    assert_eq!(blocks, dedup);
}

// Slow rear-end approach: follower at 2.5 m/s behind a leader at 1 m/s.
fn slow_scene() -> SceneSpec {
    SceneSpec::from_toml_str(
        r#"
frames = 120
[[vehicles]]
id = 1
centroid = [10, 0]
heading = 0
speed = 1
length = 4
width = 2

[[vehicles]]
id = 2
centroid = [-3, 0]
heading = 0
speed = 2.5
length = 4
width = 2
"#,
    )
    .unwrap()
}

#[test]
fn congested_windows_are_dropped() {
    let tracks = tracks_of(&slow_scene());
    let zones = ZoneMap::from_toml_str(ZONES).unwrap();
    assert!(build_observations(&tracks, &zones, &per_frame())
        .unwrap()
        .is_empty());
    let open = PipelineConfig {
        congestion: CongestionFilterConfig {
            enabled: false,
            ..Default::default()
        },
        ..per_frame()
    };
    let obs = build_observations(&tracks, &zones, &open).unwrap();
    assert!(!obs.is_empty());
    assert!(obs.iter().all(|o| o.family == ConflictType::RearEnd));
    assert!(obs.iter().all(|o| o.leader.vehicle_id == VehicleId(1)));
}

#[test]
fn covariates_use_trailing_mean_speed() {
    let mut spec = crossing_scene();
    spec.vehicles[1].profile = vec![conflict_risk::synth::ProfilePoint {
        frame: 20,
        speed: Some(11.0),
        heading: None,
    }];
    let tracks = tracks_of(&spec);
    let zones = ZoneMap::from_toml_str(ZONES).unwrap();
    let obs = build_observations(&tracks, &zones, &per_frame()).unwrap();
    let o = obs.iter().find(|o| o.frame == 40).unwrap();
    let role = if o.leader.vehicle_id == VehicleId(2) {
        o.leader
    } else {
        o.follower
    };
    let k = tracks[1].kinematics.as_ref().unwrap();
    let i = tracks[1].index_of(40).unwrap();
    assert_eq!(role.avg_speed, k.avg_speed_1s[i].unwrap());
    assert!((role.avg_speed - k.speed[i]).abs() > 0.1);
}

#[test]
fn output_is_reproducible() {
    let zones = ZoneMap::from_toml_str(ZONES).unwrap();
    let render = || {
        let obs = build_observations(&tracks_of(&crossing_scene()), &zones, &per_frame()).unwrap();
        let mut buf = Vec::new();
        write_observations(&mut buf, &obs).unwrap();
        buf
    };
    assert_eq!(render(), render());
}

#[test]
fn conflict_points_lie_in_study_area() {
    let zones = ZoneMap::from_toml_str(ZONES).unwrap();
    let study = zones.study_polygon();
    let obs = build_observations(&tracks_of(&crossing_scene()), &zones, &per_frame()).unwrap();
    for o in &obs {
        assert!(conflict_risk::geometry::convex_contains(
            &study,
            o.conflict_point
        ));
    }
    let summary = summarize_dataset(&obs).unwrap();
    assert_eq!(summary.families.len(), 1);
    assert_eq!(summary.families[0].total, obs.len());
}
