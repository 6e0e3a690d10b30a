use super::{bin_index, require_nonempty, BinnedSeries};
use crate::ensemble::SystemRecord;
use crate::error::{Error, Result};

/// Edges of `bins` equal-probability bins of Exp(`lambda`); the last edge is
/// `+inf`.
pub fn exp_percentile_edges(lambda: f64, bins: usize) -> Result<Vec<f64>> {
    if lambda.is_nan() || lambda <= 0.0 || bins == 0 {
        return Err(Error::InvalidParameter(format!(
            "need lambda > 0 and bins >= 1, got lambda={lambda}, bins={bins}"
        )));
    }
    Ok((0..=bins)
        .map(|k| {
            if k == bins {
                f64::INFINITY
            } else if k == 0 {
                0.0
            } else {
                -(1.0 - k as f64 / bins as f64).ln() / lambda
            }
        })
        .collect())
}

fn rates<'a>(records: &'a [&SystemRecord]) -> impl Iterator<Item = f64> + 'a {
    records
        .iter()
        .flat_map(|r| r.outgoing_rates.iter().map(|o| o.rate))
}

fn frequency_ratio(s_count: usize, s_total: usize, p_count: usize, p_total: usize) -> Option<f64> {
    if p_count == 0 || s_total == 0 {
        return None;
    }
    Some((s_count as f64 / s_total as f64) / (p_count as f64 / p_total as f64))
}

/// Per-bin ratio of the strategic outgoing-rate frequency to the population
/// frequency. Bins with no population rates are `None`; `bin_counts` holds
/// the strategic counts.
pub fn rate_representation(
    strategic: &[&SystemRecord],
    population: &[&SystemRecord],
    edges: &[f64],
) -> Result<BinnedSeries> {
    require_nonempty(strategic, "strategic record set")?;
    require_nonempty(population, "population record set")?;
    let bins = edges.len().saturating_sub(1);
    let mut s_counts = vec![0usize; bins];
    let mut p_counts = vec![0usize; bins];
    for x in rates(strategic) {
        if let Some(b) = bin_index(edges, x) {
            s_counts[b] += 1;
        }
    }
    for x in rates(population) {
        if let Some(b) = bin_index(edges, x) {
            p_counts[b] += 1;
        }
    }
    let s_total: usize = s_counts.iter().sum();
    let p_total: usize = p_counts.iter().sum();
    let bin_values = (0..bins)
        .map(|b| frequency_ratio(s_counts[b], s_total, p_counts[b], p_total))
        .collect();
    Ok(BinnedSeries {
        bin_edges: edges.to_vec(),
        bin_values,
        bin_counts: s_counts,
    })
}

/// Pooled representation ratio of rates in `[low, high)`.
pub fn rate_frequency_ratio(
    strategic: &[&SystemRecord],
    population: &[&SystemRecord],
    low: f64,
    high: f64,
) -> Option<f64> {
    let tally = |recs: &[&SystemRecord]| {
        let (mut inside, mut total) = (0usize, 0usize);
        for x in rates(recs) {
            total += 1;
            if x >= low && x < high {
                inside += 1;
            }
        }
        (inside, total)
    };
    let (s_in, s_total) = tally(strategic);
    let (p_in, p_total) = tally(population);
    frequency_ratio(s_in, s_total, p_in, p_total)
}

/// Per-degree ratio of strategic node frequency to population frequency,
/// over degrees `0..n`.
pub fn degree_representation(
    strategic: &[&SystemRecord],
    population: &[&SystemRecord],
) -> Result<BinnedSeries> {
    require_nonempty(strategic, "strategic record set")?;
    require_nonempty(population, "population record set")?;
    let n = strategic
        .iter()
        .chain(population)
        .map(|r| r.degree_histogram.len())
        .max()
        .unwrap_or(0);
    let sum = |recs: &[&SystemRecord]| {
        let mut h = vec![0usize; n];
        for r in recs {
            for (d, c) in r.degree_histogram.iter().enumerate() {
                h[d] += c;
            }
        }
        h
    };
    let s = sum(strategic);
    let p = sum(population);
    let s_total: usize = s.iter().sum();
    let p_total: usize = p.iter().sum();
    Ok(BinnedSeries {
        bin_edges: (0..=n).map(|d| d as f64).collect(),
        bin_values: (0..n)
            .map(|d| frequency_ratio(s[d], s_total, p[d], p_total))
            .collect(),
        bin_counts: s,
    })
}

/// True when the first and last defined ratios both exceed the minimum over
/// the defined bins strictly between them.
pub fn ratio_profile_is_u_shaped(series: &BinnedSeries) -> bool {
    let defined: Vec<f64> = series.bin_values.iter().flatten().copied().collect();
    if defined.len() < 3 {
        return false;
    }
    let interior_min = defined[1..defined.len() - 1]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    defined[0] > interior_min && defined[defined.len() - 1] > interior_min
}
