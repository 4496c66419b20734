//! Random small-angle encounters checked against the time-stepping collision oracle.
//!
//!     cargo run --release --example oracle_check -- 2000

use conflict_risk::kernel::modified_ttc;
use conflict_risk::synth::{oracle_contact, random_encounter, EncounterRanges, OracleConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> conflict_risk::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(500);
    let cfg = OracleConfig::default();
    let ranges = EncounterRanges {
        alpha_deg: (1.0, 9.0),
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut both, mut neither, mut grazing, mut mismatched) = (0, 0, 0, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let (s1, s2) = random_encounter(&mut rng, &ranges);
        let k = modified_ttc(&s1, &s2)?.ttc;
        let k = if k > cfg.horizon { f64::INFINITY } else { k };
        match oracle_contact(&s1, &s2, &cfg) {
            Some(c) if c.is_grazing(&cfg) => grazing += 1,
            Some(c) if k.is_finite() => {
                both += 1;
                worst = worst.max((k - c.time).abs());
            }
            None if !k.is_finite() => neither += 1,
            _ => mismatched += 1,
        }
    }
    println!("{n} encounters: {both} contacts, {neither} misses, {grazing} grazing, {mismatched} mismatched");
    println!(
        "largest TTC gap {:.3} ms (oracle step {} ms)",
        worst * 1e3,
        cfg.dt * 1e3
    );
    Ok(())
}
