use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{derive_seed, run_ensemble, sample_rates, EnsembleConfig, SystemRecord};
use crate::error::{Error, Result};
use crate::graph::generate_star;
use crate::stability::{classify_strategic, stability, GradientOptions, StabilityResult};
use crate::stats;

/// Mixed into the master seed so star rate draws never coincide with the
/// Barabási-Albert ensemble streams.
const STAR_SALT: u64 = 0x5354_4152_5f52_4154;

/// Below this many systems in either group a comparison is flagged as
/// having wide uncertainty.
const SMALL_SAMPLE: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarComparison {
    pub star_samples: usize,
    pub star_mean_stability: f64,
    pub ba_records: usize,
    pub ba_hub_count: usize,
    pub ba_hub_mean_stability: f64,
    /// `star_mean / ba_hub_mean - 1`.
    pub relative_difference: f64,
    pub top_star_count: usize,
    pub top_branch_mean: f64,
    pub top_hub_mean: f64,
    /// Mean branch centrality over mean hub centrality within the most
    /// strategic 1% of stars.
    pub branch_hub_ratio: f64,
    pub warnings: Vec<String>,
}

fn star_systems(config: &EnsembleConfig, samples: usize) -> Result<Vec<StabilityResult>> {
    let g = generate_star(config.n)?;
    let master = config.master_seed ^ STAR_SALT;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot build worker pool: {e}")))?;
    pool.install(|| {
        (0..samples as u64)
            .into_par_iter()
            .map(|i| {
                let r = sample_rates(&g, config.rate_lambda, derive_seed(master, i, 1))?;
                stability(&g, &r, &config.solver, &GradientOptions::default())
            })
            .collect()
    })
}

/// Compares random-rate stars on `config.n` nodes with the Barabási-Albert
/// records whose maximum degree is `n - 1`.
pub fn star_comparison_with_records(
    config: &EnsembleConfig,
    star_samples: usize,
    ba_records: &[SystemRecord],
) -> Result<StarComparison> {
    config.validate()?;
    if star_samples < 1 {
        return Err(Error::InvalidParameter(
            "need at least one star sample".into(),
        ));
    }
    let hubs: Vec<f64> = ba_records
        .iter()
        .filter(|r| r.max_degree() == config.n - 1)
        .map(|r| r.stability)
        .collect();
    if hubs.is_empty() {
        return Err(Error::Empty(format!(
            "no Barabási-Albert record among {} has a hub of degree {}; sample more",
            ba_records.len(),
            config.n - 1
        )));
    }
    let stars = star_systems(config, star_samples)?;
    let star_stabilities: Vec<f64> = stars.iter().map(|s| s.stability).collect();
    let star_mean = stats::mean(&star_stabilities).unwrap_or(f64::NAN);
    let hub_mean = stats::mean(&hubs).unwrap_or(f64::NAN);

    // A single star cannot be split; it is its own top class.
    let top: Vec<usize> = if star_samples == 1 {
        vec![0]
    } else {
        classify_strategic(&star_stabilities, 0.01, config.strategic_tail)?.strategic
    };
    let n = config.n;
    let top_hub_mean = top.iter().map(|&i| stars[i].centrality[0]).sum::<f64>() / top.len() as f64;
    let top_branch_mean = top
        .iter()
        .map(|&i| stars[i].centrality[1..].iter().sum::<f64>() / (n - 1) as f64)
        .sum::<f64>()
        / top.len() as f64;

    let mut warnings = Vec::new();
    if star_samples < SMALL_SAMPLE || hubs.len() < SMALL_SAMPLE {
        let msg = format!(
            "wide uncertainty: {star_samples} star samples, {} hub-{} records",
            hubs.len(),
            n - 1
        );
        warn!("{msg}");
        warnings.push(msg);
    }

    Ok(StarComparison {
        star_samples,
        star_mean_stability: star_mean,
        ba_records: ba_records.len(),
        ba_hub_count: hubs.len(),
        ba_hub_mean_stability: hub_mean,
        relative_difference: star_mean / hub_mean - 1.0,
        top_star_count: top.len(),
        top_branch_mean,
        top_hub_mean,
        branch_hub_ratio: top_branch_mean / top_hub_mean,
        warnings,
    })
}

/// Runs a fresh Barabási-Albert ensemble of `ba_samples` records and
/// compares it with `star_samples` random-rate stars.
pub fn star_comparison(
    star_samples: usize,
    ba_samples: usize,
    config: &EnsembleConfig,
) -> Result<StarComparison> {
    if ba_samples < 1 {
        return Err(Error::InvalidParameter(
            "need at least one BA sample".into(),
        ));
    }
    let ba_config = EnsembleConfig {
        sample_count: ba_samples,
        ..config.clone()
    };
    let mut records = Vec::new();
    run_ensemble(&ba_config, &mut records)?;
    star_comparison_with_records(config, star_samples, &records)
}
