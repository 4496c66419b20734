//! Halton draws per group, plain and scrambled, and their normal moments.
//!
//!     cargo run --example halton_draws

use conflict_risk::logit::{Draws, HaltonConfig};

fn moments(d: &Draws, dim: usize, groups: usize) -> (f64, f64) {
    let xs: Vec<f64> = (0..groups)
        .flat_map(|g| (0..d.count).map(move |r| (g, r)))
        .map(|(g, r)| d.get(g, r)[dim])
        .collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (mean, xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n)
}

fn main() {
    let groups = 50;
    for scramble in [false, true] {
        let cfg = HaltonConfig {
            count: 200,
            scramble,
            seed: 3,
            ..Default::default()
        };
        let d = Draws::halton(&cfg, groups, 4);
        println!("scramble = {scramble}");
        for dim in 0..4 {
            let (m, v) = moments(&d, dim, groups);
            println!("  dim {dim}: mean {m:+.4}, variance {v:.4}");
        }
        println!("  group 0, first draw: {:?}", d.get(0, 0));
    }
}
