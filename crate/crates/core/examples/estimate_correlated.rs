//! Simulate choices from a known correlated grouped random-parameters logit and
//! estimate it back, printing the full report.
//!
//!     cargo run --release --example estimate_correlated

use conflict_risk::logit::{maximize, EstimationOptions};
use conflict_risk::report::render_estimation;
use conflict_risk::synth::{simulate_choices, SimulationTruth};

const TRUTH: &str = include_str!("data/truth.toml");

fn main() -> conflict_risk::Result<()> {
    let truth: SimulationTruth = toml::from_str(TRUTH)?;
    let sim = simulate_choices(&truth)?;
    println!(
        "{} observations in {} groups; true parameters {:?}\n",
        sim.dataset.len(),
        sim.dataset.n_groups(),
        truth.params
    );
    let fit = maximize(&sim.dataset, &truth.spec, &EstimationOptions::default())?;
    print!("{}", render_estimation(&fit));
    Ok(())
}
