//! Halton draws transformed to standard normals, shared within groups.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HaltonConfig {
    /// Draws per group.
    pub count: usize,
    /// Leading points discarded from each sequence.
    pub skip: usize,
    /// Apply a seeded random digit permutation per base.
    pub scramble: bool,
    pub seed: u64,
}

impl Default for HaltonConfig {
    fn default() -> Self {
        Self {
            count: 1000,
            skip: 100,
            scramble: false,
            seed: 0,
        }
    }
}

/// The first `n` primes.
pub fn primes(n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut c = 2u64;
    while out.len() < n {
        if out
            .iter()
            .take_while(|&&p| p * p <= c)
            .all(|&p| !c.is_multiple_of(p))
        {
            out.push(c);
        }
        c += 1;
    }
    out
}

/// Radical inverse of `index` in `base`, with digits mapped through `perm`.
/// `perm[0]` must be 0 so the value stays in (0, 1) for `index ≥ 1`.
pub fn radical_inverse(mut index: u64, base: u64, perm: Option<&[u64]>) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut x = 0.0;
    while index > 0 {
        let d = index % base;
        let d = perm.map_or(d, |p| p[d as usize]);
        x += d as f64 * f;
        index /= base;
        f *= inv;
    }
    x
}

/// Unscrambled Halton value: the `index`-th point (1-based) in `base`.
pub fn halton(index: u64, base: u64) -> f64 {
    radical_inverse(index, base, None)
}

fn permutations(bases: &[u64], seed: u64) -> Vec<Vec<u64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    bases
        .iter()
        .map(|&b| {
            let mut tail: Vec<u64> = (1..b).collect();
            tail.shuffle(&mut rng);
            std::iter::once(0).chain(tail).collect()
        })
        .collect()
}

/// Standard-normal draws laid out as `[group][draw][dim]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Draws {
    pub groups: usize,
    pub count: usize,
    pub dims: usize,
    values: Vec<f64>,
}

impl Draws {
    /// Draws for `groups` groups and `dims` random dimensions. Group `g` takes points
    /// `skip + g·R + 1 ..= skip + (g+1)·R` of each sequence, so no two groups share a
    /// point. With no random dimensions a single empty draw is produced.
    pub fn halton(config: &HaltonConfig, groups: usize, dims: usize) -> Self {
        if dims == 0 {
            return Self {
                groups,
                count: 1,
                dims: 0,
                values: Vec::new(),
            };
        }
        let r = config.count.max(1);
        let bases = primes(dims);
        let perms = config.scramble.then(|| permutations(&bases, config.seed));
        let normal = Normal::standard();
        let mut values = Vec::with_capacity(groups * r * dims);
        for i in 0..groups * r {
            let index = (config.skip + i + 1) as u64;
            for (k, &b) in bases.iter().enumerate() {
                let u = radical_inverse(index, b, perms.as_ref().map(|p| p[k].as_slice()));
                values.push(normal.inverse_cdf(u));
            }
        }
        Self {
            groups,
            count: r,
            dims,
            values,
        }
    }

    /// Draw `r` of group `g`.
    pub fn get(&self, g: usize, r: usize) -> &[f64] {
        let start = (g * self.count + r) * self.dims;
        &self.values[start..start + self.dims]
    }
}
