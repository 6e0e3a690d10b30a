use serde::{Deserialize, Serialize};

use super::{
    degree_representation, exp_percentile_edges, logistic_fit, rate_frequency_ratio,
    rate_representation, ratio_profile_is_u_shaped, split_records, stability_vs_metric,
    BinnedSeries, LogisticFit, Metric, MetricSeries,
};
use crate::ensemble::SystemRecord;
use crate::error::Result;
use crate::stability::StrategicTail;

/// Everything derived from one record set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetAnalysis {
    pub records: usize,
    pub strategic_count: usize,
    pub strategic_tail: StrategicTail,
    pub threshold: f64,
    pub rate_representation: BinnedSeries,
    /// Percentile of the Exp(λ) reference at which rate 1/λ sits.
    pub unit_rate_percentile: f64,
    /// Pooled strategic/population ratio for rates below `1/λ`.
    pub ratio_below_unit_rate: Option<f64>,
    /// Pooled ratio for rates at or above `1/λ`.
    pub ratio_above_unit_rate: Option<f64>,
    /// Percentile band `[low, high)` of the bin with the largest ratio.
    pub rate_peak_percentile: Option<(f64, f64)>,
    pub degree_representation: BinnedSeries,
    pub degree_u_shaped: bool,
    /// Ratio at degree `n - 1`.
    pub top_degree_ratio: Option<f64>,
    pub metrics: Vec<MetricSeries>,
    pub logistic: Option<LogisticFit>,
    pub logistic_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub all: SubsetAnalysis,
    /// Same analyses restricted to records whose solves all converged.
    pub converged_only: Option<SubsetAnalysis>,
    pub nonconverged: usize,
}

impl AnalysisReport {
    /// Scalar summary suitable for the JSON output: series are omitted.
    pub fn summary_json(&self) -> serde_json::Value {
        fn subset(s: &SubsetAnalysis) -> serde_json::Value {
            serde_json::json!({
                "records": s.records,
                "strategic_count": s.strategic_count,
                "strategic_tail": s.strategic_tail,
                "threshold": s.threshold,
                "unit_rate_percentile": s.unit_rate_percentile,
                "ratio_below_unit_rate": s.ratio_below_unit_rate,
                "ratio_above_unit_rate": s.ratio_above_unit_rate,
                "rate_peak_percentile": s.rate_peak_percentile,
                "degree_u_shaped": s.degree_u_shaped,
                "top_degree_ratio": s.top_degree_ratio,
                "spearman": s.metrics.iter()
                    .map(|m| (m.metric.name().to_string(), serde_json::json!(m.spearman)))
                    .collect::<serde_json::Map<_, _>>(),
                "logistic": s.logistic,
                "logistic_error": s.logistic_error,
            })
        }
        serde_json::json!({
            "all": subset(&self.all),
            "converged_only": self.converged_only.as_ref().map(subset),
            "nonconverged": self.nonconverged,
        })
    }
}

fn analyze_subset(
    records: &[SystemRecord],
    fraction: f64,
    tail: StrategicTail,
    rate_lambda: f64,
    rate_bins: usize,
) -> Result<SubsetAnalysis> {
    let split = split_records(records, fraction, tail)?;
    let edges = exp_percentile_edges(rate_lambda, rate_bins)?;
    let rates = rate_representation(&split.strategic, &split.population, &edges)?;
    let unit_rate = 1.0 / rate_lambda;
    let peak = rates.argmax().map(|b| {
        (
            b as f64 / rate_bins as f64,
            (b + 1) as f64 / rate_bins as f64,
        )
    });
    let degrees = degree_representation(&split.strategic, &split.population)?;
    let top_degree_ratio = degrees.bin_values.last().copied().flatten();
    let all: Vec<&SystemRecord> = records.iter().collect();
    let metrics = Metric::ALL
        .iter()
        .map(|&m| stability_vs_metric(&all, m))
        .collect::<Result<Vec<_>>>()?;
    let (logistic, logistic_error) = match logistic_fit(&all) {
        Ok(fit) => (Some(fit), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(SubsetAnalysis {
        records: records.len(),
        strategic_count: split.strategic.len(),
        strategic_tail: tail,
        threshold: split.threshold,
        unit_rate_percentile: 1.0 - (-1.0f64).exp(),
        ratio_below_unit_rate: rate_frequency_ratio(
            &split.strategic,
            &split.population,
            0.0,
            unit_rate,
        ),
        ratio_above_unit_rate: rate_frequency_ratio(
            &split.strategic,
            &split.population,
            unit_rate,
            f64::INFINITY,
        ),
        rate_peak_percentile: peak,
        degree_u_shaped: ratio_profile_is_u_shaped(&degrees),
        degree_representation: degrees,
        top_degree_ratio,
        rate_representation: rates,
        metrics,
        logistic,
        logistic_error,
    })
}

/// Runs the full set of record-level analyses, once on every record and
/// once on the records whose solves converged.
pub fn analyze_records(
    records: &[SystemRecord],
    fraction: f64,
    tail: StrategicTail,
    rate_lambda: f64,
    rate_bins: usize,
) -> Result<AnalysisReport> {
    let all = analyze_subset(records, fraction, tail, rate_lambda, rate_bins)?;
    let converged: Vec<SystemRecord> = records
        .iter()
        .filter(|r| r.solver_converged)
        .cloned()
        .collect();
    let nonconverged = records.len() - converged.len();
    let converged_only = if converged.is_empty() {
        None
    } else if nonconverged == 0 {
        Some(all.clone())
    } else {
        Some(analyze_subset(
            &converged,
            fraction,
            tail,
            rate_lambda,
            rate_bins,
        )?)
    };
    Ok(AnalysisReport {
        all,
        converged_only,
        nonconverged,
    })
}
