//! Poisson deployment of nodes inside a fractal domain.
//!
//! Candidates are drawn as a homogeneous Poisson process on the bounding
//! square `[-y_max, y_max]²` and thinned by the membership test, which leaves
//! an exact Poisson process of the same intensity on the domain.
//!
//! Random stream: `ChaCha8Rng::seed_from_u64(seed)`. The candidate count is
//! drawn first, then `x, y` for each candidate in turn.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::domain::{Family, FractalDomain, DEFAULT_MAX_DEPTH};
use crate::error::{Error, Result};
use crate::geometry::Point2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSet {
    pub points: Vec<Point2>,
    pub rho: f64,
    pub seed: u64,
    pub family: Family,
    pub theta: f64,
}

impl NodeSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// SplitMix64 finaliser.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for an independent sub-stream, a pure function of the master seed
/// and the stream key words. Each word is folded in with a SplitMix64 round.
pub fn derive_seed(master: u64, keys: &[u64]) -> u64 {
    keys.iter().fold(mix64(master), |acc, &k| mix64(acc ^ mix64(k)))
}

pub fn sample_poisson_nodes(domain: &FractalDomain, rho: f64, seed: u64) -> Result<NodeSet> {
    if !rho.is_finite() || rho < 0.0 {
        return Err(Error::NegativeDensity(rho));
    }
    let mut points = Vec::new();
    if rho > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half = domain.y_max;
        let mean = rho * domain.bounding_side() * domain.bounding_side();
        let count = Poisson::new(mean)
            .map_err(|e| Error::InvalidParameter(format!("poisson mean {mean}: {e}")))?
            .sample(&mut rng) as u64;
        points.reserve((count as f64 * domain.area / (4.0 * half * half)) as usize + 8);
        for _ in 0..count {
            let x = rng.random_range(-half..half);
            let y = rng.random_range(-half..half);
            let p = Point2::new(x, y);
            if domain.contains(p, DEFAULT_MAX_DEPTH).is_inside() {
                points.push(p);
            }
        }
    }
    Ok(NodeSet {
        points,
        rho,
        seed,
        family: domain.spec.family,
        theta: domain.spec.theta,
    })
}
