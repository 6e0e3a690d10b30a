use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{require_nonempty, BinnedSeries};
use crate::ensemble::SystemRecord;
use crate::error::{Error, Result};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    MeanPathLength,
    MeanLocalClustering,
    DegreeStddev,
}

impl Metric {
    pub const ALL: [Metric; 3] = [
        Self::MeanPathLength,
        Self::MeanLocalClustering,
        Self::DegreeStddev,
    ];

    pub fn of(self, r: &SystemRecord) -> f64 {
        match self {
            Self::MeanPathLength => r.mean_path_length,
            Self::MeanLocalClustering => r.mean_local_clustering,
            Self::DegreeStddev => r.degree_stddev,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::MeanPathLength => "mean_path_length",
            Self::MeanLocalClustering => "mean_local_clustering",
            Self::DegreeStddev => "degree_stddev",
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown metric `{s}`")))
    }
}

/// Mean stability for each distinct value of a graph metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub metric: Metric,
    /// Distinct metric values, ascending; bin `b` holds exactly `values[b]`.
    pub values: Vec<f64>,
    /// Bin edges sit midway between consecutive distinct values.
    pub series: BinnedSeries,
    /// Record-level Spearman correlation between the metric and stability.
    pub spearman: f64,
    pub records: usize,
}

impl MetricSeries {
    /// `bin_low,bin_high,value,count,metric_value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_low,bin_high,value,count,metric_value\n");
        let s = &self.series;
        for b in 0..s.len() {
            let value = s.bin_values[b].map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                s.bin_edges[b],
                s.bin_edges[b + 1],
                value,
                s.bin_counts[b],
                self.values[b]
            );
        }
        out
    }
}

// Metric values are ratios of small integers at these graph sizes; values
// that agree to 1e-9 are the same structural class.
fn class_key(x: f64) -> i64 {
    (x * 1e9).round() as i64
}

pub fn stability_vs_metric(records: &[&SystemRecord], metric: Metric) -> Result<MetricSeries> {
    require_nonempty(records, "record set")?;
    let mut groups: BTreeMap<i64, (f64, f64, usize)> = BTreeMap::new();
    for r in records {
        let x = metric.of(r);
        if !x.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "record {} has non-finite {}",
                r.record_index,
                metric.name()
            )));
        }
        let entry = groups.entry(class_key(x)).or_insert((x, 0.0, 0));
        entry.1 += r.stability;
        entry.2 += 1;
    }
    let values: Vec<f64> = groups.values().map(|g| g.0).collect();
    let mut edges = Vec::with_capacity(values.len() + 1);
    edges.push(values[0]);
    edges.extend(values.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    edges.push(values[values.len() - 1]);

    let xs: Vec<f64> = records.iter().map(|r| metric.of(r)).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.stability).collect();
    Ok(MetricSeries {
        metric,
        series: BinnedSeries {
            bin_edges: edges,
            bin_values: groups.values().map(|g| Some(g.1 / g.2 as f64)).collect(),
            bin_counts: groups.values().map(|g| g.2).collect(),
        },
        values,
        spearman: stats::spearman(&xs, &ys),
        records: records.len(),
    })
}

/// Per-record scatter of stability against clustering, with mean path
/// length carried along for colouring.
pub fn clustering_scatter_csv(records: &[&SystemRecord]) -> String {
    let mut out = String::from("record_index,mean_local_clustering,stability,mean_path_length\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.record_index, r.mean_local_clustering, r.stability, r.mean_path_length
        );
    }
    out
}
