//! Post-processing of ensemble records into plot-ready series, correlations
//! and regressions.

mod coalition;
mod regression;
mod report;
mod representation;
mod star;
mod structure;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use coalition::{coalition_sweep, outlying_pair, reciprocity_curve, CoalitionPoint};
pub use regression::{
    fit_logistic, levenberg_marquardt, logistic_fit, LeastSquaresProblem, LmOptions, LmReport,
    LogisticFit,
};
pub use report::{analyze_records, AnalysisReport, SubsetAnalysis};
pub use representation::{
    degree_representation, exp_percentile_edges, rate_frequency_ratio, rate_representation,
    ratio_profile_is_u_shaped,
};
pub use star::{star_comparison, star_comparison_with_records, StarComparison};
pub use structure::{clustering_scatter_csv, stability_vs_metric, Metric, MetricSeries};

use crate::ensemble::SystemRecord;
use crate::error::{Error, Result};
use crate::stability::{classify_strategic, Partition, StrategicTail};

/// Histogram-like series: `bin_values[b]` summarises the data falling in
/// `[bin_edges[b], bin_edges[b + 1])`. Bins without data are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedSeries {
    pub bin_edges: Vec<f64>,
    pub bin_values: Vec<Option<f64>>,
    pub bin_counts: Vec<usize>,
}

impl BinnedSeries {
    pub fn len(&self) -> usize {
        self.bin_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bin_values.is_empty()
    }

    /// Index of the bin containing `x`, if any. The last bin is closed on
    /// the right.
    pub fn bin_of(&self, x: f64) -> Option<usize> {
        bin_index(&self.bin_edges, x)
    }

    /// Index of the largest defined value, first one on ties.
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, v) in self.bin_values.iter().enumerate() {
            if let Some(v) = *v {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((i, v));
                }
            }
        }
        best.map(|(i, _)| i)
    }

    /// CSV with columns `bin_low,bin_high,value,count`; missing values are
    /// left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_low,bin_high,value,count\n");
        for b in 0..self.len() {
            let value = self.bin_values[b]
                .map(|v| v.to_string())
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{}",
                self.bin_edges[b],
                self.bin_edges[b + 1],
                value,
                self.bin_counts[b]
            );
        }
        out
    }
}

pub(crate) fn bin_index(edges: &[f64], x: f64) -> Option<usize> {
    let bins = edges.len().checked_sub(1)?;
    if bins == 0 || !(x >= edges[0] && x <= edges[bins]) {
        return None;
    }
    // First edge strictly greater than x, minus one.
    let upper = edges.partition_point(|&e| e <= x);
    Some(upper.saturating_sub(1).min(bins - 1))
}

/// Borrowed strategic / population split of a record set.
pub struct RecordSplit<'a> {
    pub strategic: Vec<&'a SystemRecord>,
    pub population: Vec<&'a SystemRecord>,
    pub threshold: f64,
}

pub fn split_records(
    records: &[SystemRecord],
    fraction: f64,
    tail: StrategicTail,
) -> Result<RecordSplit<'_>> {
    let stabilities: Vec<f64> = records.iter().map(|r| r.stability).collect();
    let Partition {
        strategic,
        population,
        threshold,
    } = classify_strategic(&stabilities, fraction, tail)?;
    Ok(RecordSplit {
        strategic: strategic.iter().map(|&i| &records[i]).collect(),
        population: population.iter().map(|&i| &records[i]).collect(),
        threshold,
    })
}

pub(crate) fn require_nonempty<T>(items: &[T], what: &str) -> Result<()> {
    if items.is_empty() {
        Err(Error::Empty(format!("{what} is empty")))
    } else {
        Ok(())
    }
}
