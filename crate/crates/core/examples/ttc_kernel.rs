//! Two vehicles on converging paths: modified TTC, contact type and severity.
//!
//!     cargo run --example ttc_kernel

use conflict_risk::geometry::Vec2;
use conflict_risk::kernel::{
    classify, modified_ttc, ttc_longitudinal, KinematicState, SeverityThresholds, VehicleId,
};

fn main() -> conflict_risk::Result<()> {
    let thresholds = SeverityThresholds::default();

    // A car merging at 6 degrees into the path of a slower goods vehicle.
    let car = KinematicState::new(VehicleId(1), Vec2::new(0.0, -3.0), 6.0, 14.0, 4.5, 1.8)?;
    let truck = KinematicState::new(VehicleId(7), Vec2::new(18.0, 0.0), 0.0, 9.0, 9.0, 2.5)?;
    let r = modified_ttc(&car, &truck)?;
    let (kind, severity) = classify(&r, &thresholds);
    println!(
        "merging:   ttc {:.3} s, {:?}, {:?}, {:?}",
        r.ttc, r.branch, kind, severity
    );
    if let Some(p) = r.conflict_point {
        println!(
            "           conflict point ({:.2}, {:.2}), alpha {:.1} deg",
            p.x, p.y, r.alpha_deg
        );
    }

    // Same lane, same heading: the 2D kernel agrees with the one-dimensional formula.
    let leader = KinematicState::new(VehicleId(2), Vec2::new(25.0, 0.0), 0.0, 8.0, 4.5, 1.8)?;
    let follower = KinematicState::new(VehicleId(3), Vec2::new(0.0, 0.0), 0.0, 16.0, 4.5, 1.8)?;
    let r = modified_ttc(&follower, &leader)?;
    println!(
        "following: ttc {:.3} s, longitudinal {:.3} s, {:?}",
        r.ttc,
        ttc_longitudinal(&leader, &follower)?,
        classify(&r, &thresholds).1
    );

    // Diverging paths never meet.
    let away = KinematicState::new(VehicleId(4), Vec2::new(10.0, 5.0), 30.0, 12.0, 4.5, 1.8)?;
    println!("diverging: ttc {}", modified_ttc(&leader, &away)?.ttc);
    Ok(())
}
