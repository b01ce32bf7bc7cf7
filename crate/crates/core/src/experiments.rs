//! Monte Carlo estimation of the full-connection probability and the
//! analyses run on top of it: stretched-exponential fits, the
//! density-rescaling check and the gateway count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::connectivity::{connectivity_report, DEFAULT_RANGE};
use crate::domain::{Family, FractalDomain, FractalSpec, DEFAULT_MAX_DEPTH};
use crate::error::{Error, Result};
use crate::sampling::{derive_seed, sample_poisson_nodes};

/// Dimension of the ambient plane.
pub const AMBIENT_DIMENSION: f64 = 2.0;
pub const DEFAULT_SEED: u64 = 20_150_601;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;
/// Relative tolerance when pairing `rho` with `rho / r²`.
pub const PAIR_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub family: Family,
    pub thetas: Vec<f64>,
    pub rhos: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub r0: f64,
    pub max_depth: u32,
    pub confidence: f64,
}

impl SweepConfig {
    pub fn new(family: Family, thetas: Vec<f64>, rhos: Vec<f64>, trials: usize) -> Self {
        SweepConfig {
            family,
            thetas,
            rhos,
            trials,
            master_seed: DEFAULT_SEED,
            r0: DEFAULT_RANGE,
            max_depth: DEFAULT_MAX_DEPTH,
            confidence: DEFAULT_CONFIDENCE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.thetas.is_empty() || self.rhos.is_empty() {
            return bad("theta and rho lists must be non-empty".into());
        }
        for &t in &self.thetas {
            FractalSpec::new(self.family, t)?;
        }
        if self.rhos.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return bad("rho values must be positive and finite".into());
        }
        if self.rhos.windows(2).any(|w| w[0] >= w[1]) {
            return bad("rho grid must be strictly ascending".into());
        }
        if !(self.r0 > 0.0 && self.r0.is_finite()) {
            return bad(format!("r0 must be positive, got {}", self.r0));
        }
        if self.max_depth == 0 {
            return bad("max_depth must be at least 1".into());
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return bad(format!("confidence must lie in (0, 1), got {}", self.confidence));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub family: Family,
    pub theta: f64,
    pub rho: f64,
    pub trials: usize,
    pub successes: usize,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_n: f64,
    pub mean_isolated: f64,
    /// Trials in which some sight test fell back to the chord rule.
    pub depth_exhausted: usize,
}

#[derive(Debug, Clone, Copy)]
struct TrialOutcome {
    connected: bool,
    nodes: usize,
    isolated: usize,
    exhausted: bool,
}

/// Seed of one trial: depends only on the master seed, the domain, the
/// density and the trial number, never on grid position or thread count.
pub fn trial_seed(master: u64, family: Family, theta: f64, rho: f64, trial: u64) -> u64 {
    derive_seed(master, &[family.n() as u64, theta.to_bits(), rho.to_bits(), trial])
}

/// Two-sided normal quantile for the given confidence level.
pub fn normal_quantile(confidence: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - (1.0 - confidence) / 2.0)
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: usize, trials: usize, confidence: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = normal_quantile(confidence);
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0).min(p), (centre + half).min(1.0).max(p))
}

fn run_point(config: &SweepConfig, domain: &FractalDomain, rho: f64) -> Result<SweepRow> {
    let theta = domain.spec.theta;
    let outcomes = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(config.master_seed, config.family, theta, rho, t);
            let nodes = sample_poisson_nodes(domain, rho, seed)?;
            let rep = connectivity_report(domain, &nodes, config.r0, config.max_depth);
            Ok(TrialOutcome {
                connected: rep.fully_connected,
                nodes: rep.node_count,
                isolated: rep.isolated_count,
                exhausted: rep.depth_exhausted_count > 0,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let trials = outcomes.len();
    let successes = outcomes.iter().filter(|o| o.connected).count();
    let total_n: usize = outcomes.iter().map(|o| o.nodes).sum();
    let total_isolated: usize = outcomes.iter().map(|o| o.isolated).sum();
    let (ci_low, ci_high) = wilson_interval(successes, trials, config.confidence);
    Ok(SweepRow {
        family: config.family,
        theta,
        rho,
        trials,
        successes,
        p_hat: successes as f64 / trials as f64,
        ci_low,
        ci_high,
        mean_n: total_n as f64 / trials as f64,
        mean_isolated: total_isolated as f64 / trials as f64,
        depth_exhausted: outcomes.iter().filter(|o| o.exhausted).count(),
    })
}

/// One row per `(theta, rho)`, theta-major in config order.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let mut rows = Vec::with_capacity(config.thetas.len() * config.rhos.len());
    for &theta in &config.thetas {
        let domain = FractalDomain::new(FractalSpec::new(config.family, theta)?)?;
        for &rho in &config.rhos {
            rows.push(run_point(config, &domain, rho)?);
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Fitted exponent of ρ.
    pub beta_hat: f64,
    /// Fitted prefactor.
    pub a_hat: f64,
    pub beta_se: f64,
    pub a_se: f64,
    pub intercept: f64,
    pub intercept_se: f64,
    pub rows_used: usize,
    pub rho_min: f64,
}

pub const MIN_FIT_ROWS: usize = 3;

/// Least-squares fit of `ln(-ln p) = ln a + β ln ρ` over rows with
/// `0 < successes < trials` and `rho >= rho_min`.
pub fn fit_stretched_exponential(rows: &[SweepRow], rho_min: f64) -> Result<FitResult> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.successes > 0 && r.successes < r.trials && r.rho >= rho_min)
        .map(|r| (r.rho.ln(), (-r.p_hat.ln()).ln()))
        .collect();
    if pts.len() < MIN_FIT_ROWS {
        return Err(Error::InsufficientData {
            usable: pts.len(),
            required: MIN_FIT_ROWS,
        });
    }
    let m = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData {
            usable: 1,
            required: MIN_FIT_ROWS,
        });
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ssr: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let s2 = ssr / (m - 2.0);
    let beta_se = (s2 / sxx).sqrt();
    let intercept_se = (s2 * (1.0 / m + mean_x * mean_x / sxx)).sqrt();
    let a_hat = intercept.exp();
    Ok(FitResult {
        beta_hat: slope,
        a_hat,
        beta_se,
        // delta method
        a_se: a_hat * intercept_se,
        intercept,
        intercept_se,
        rows_used: pts.len(),
        rho_min,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPair {
    pub rho: f64,
    pub rho_scaled: f64,
    /// Estimate at the rescaled density.
    pub lhs: f64,
    pub lhs_ci: (f64, f64),
    /// Estimate at the base density raised to the power `n`.
    pub rhs: f64,
    pub rhs_ci: (f64, f64),
    pub ci_overlap: bool,
}

/// Compares `P(ρ / r²)` with `P(ρ)^n` for every density pair present in
/// `rows` (matched to within 1 %).
pub fn scaling_check(rows: &[SweepRow], domain: &FractalDomain) -> Result<Vec<ScalingPair>> {
    let factor = domain.r.powf(-AMBIENT_DIMENSION);
    let n = domain.n() as i32;
    let ours: Vec<&SweepRow> = rows
        .iter()
        .filter(|r| r.family == domain.spec.family && (r.theta - domain.spec.theta).abs() < 1e-12)
        .collect();
    let mut pairs = Vec::new();
    for base in &ours {
        let target = base.rho * factor;
        let best = ours
            .iter()
            .map(|r| (r, (r.rho / target - 1.0).abs()))
            .filter(|(_, err)| *err <= PAIR_TOLERANCE)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((scaled, _)) = best {
            let rhs_ci = (base.ci_low.powi(n), base.ci_high.powi(n));
            let lhs_ci = (scaled.ci_low, scaled.ci_high);
            pairs.push(ScalingPair {
                rho: base.rho,
                rho_scaled: scaled.rho,
                lhs: scaled.p_hat,
                lhs_ci,
                rhs: base.p_hat.powi(n),
                rhs_ci,
                ci_overlap: lhs_ci.0 <= rhs_ci.1 && rhs_ci.0 <= lhs_ci.1,
            });
        }
    }
    if pairs.is_empty() {
        return Err(Error::NoMatchingPairs);
    }
    Ok(pairs)
}

/// Number of relays needed to cover a boundary of dimension `dimension`
/// resolved down to `1 / scale_ratio` of the overall size. Expects
/// `scale_ratio >= 1` and `1 <= dimension <= 2`.
pub fn gateway_estimate(scale_ratio: f64, dimension: f64) -> f64 {
    scale_ratio.powf(dimension)
}
