use serde::{Deserialize, Serialize};

use super::{bin_index, BinnedSeries};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::likedness::{likedness_centrality, SolverOptions};
use crate::rates::RateMatrix;

/// Mean incoming rate as a function of outgoing rate. Every directed edge
/// along which `i` actually likes `j` contributes the point
/// `(R[j][i], R[i][j])`; edges with zero outgoing rate are skipped.
pub fn reciprocity_curve(g: &Graph, r: &RateMatrix, edges: &[f64]) -> Result<BinnedSeries> {
    r.check_compatible(g)?;
    let bins = edges.len().saturating_sub(1);
    if bins == 0 {
        return Err(Error::InvalidParameter("need at least one bin".into()));
    }
    let mut sums = vec![0.0; bins];
    let mut counts = vec![0usize; bins];
    for (i, j) in g.directed_edges() {
        let outgoing = r.get(j, i);
        let incoming = r.get(i, j);
        if outgoing <= 0.0 {
            continue;
        }
        if let Some(b) = bin_index(edges, outgoing) {
            sums[b] += incoming;
            counts[b] += 1;
        }
    }
    Ok(BinnedSeries {
        bin_edges: edges.to_vec(),
        bin_values: sums
            .iter()
            .zip(&counts)
            .map(|(s, &c)| (c > 0).then(|| s / c as f64))
            .collect(),
        bin_counts: counts,
    })
}

/// Adjacent pair of "outlying" nodes: both of minimum degree if such an
/// edge exists, otherwise the edge with the smallest degree sum. Ties go to
/// the lexicographically first edge.
pub fn outlying_pair(g: &Graph) -> Result<(usize, usize)> {
    let min_degree = (0..g.node_count())
        .map(|i| g.degree(i))
        .filter(|&d| d > 0)
        .min()
        .ok_or_else(|| Error::Degenerate("graph has no edges".into()))?;
    let edges = g.edges();
    if let Some(&e) = edges
        .iter()
        .find(|&&(a, b)| g.degree(a) == min_degree && g.degree(b) == min_degree)
    {
        return Ok(e);
    }
    edges
        .iter()
        .copied()
        .min_by_key(|&(a, b)| (g.degree(a) + g.degree(b), a, b))
        .ok_or_else(|| Error::Degenerate("graph has no edges".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoalitionPoint {
    pub joint_rate: f64,
    pub member_a: f64,
    pub member_b: f64,
    pub others_mean: f64,
    pub converged: bool,
}

/// Re-solves the system with `R[a][b] = R[b][a] = ρ` for each joint rate ρ
/// and reports the normalized centralities of the pair and the mean of
/// everyone else.
pub fn coalition_sweep(
    g: &Graph,
    r: &RateMatrix,
    a: usize,
    b: usize,
    joint_rates: &[f64],
    opts: &SolverOptions,
) -> Result<Vec<CoalitionPoint>> {
    if a == b {
        return Err(Error::InvalidParameter(
            "coalition needs two distinct nodes".into(),
        ));
    }
    if !g.has_edge(a, b) {
        return Err(Error::InvalidParameter(format!(
            "coalition pair ({a}, {b}) is not an edge"
        )));
    }
    r.check_compatible(g)?;
    let n = g.node_count();
    joint_rates
        .iter()
        .map(|&rho| {
            let mut m = r.clone();
            m.set(a, b, rho)?;
            m.set(b, a, rho)?;
            let c = likedness_centrality(g, &m, opts)?;
            let others = (0..n).filter(|&k| k != a && k != b).map(|k| c.values[k]);
            let others_mean = if n > 2 {
                others.sum::<f64>() / (n - 2) as f64
            } else {
                0.0
            };
            Ok(CoalitionPoint {
                joint_rate: rho,
                member_a: c.values[a],
                member_b: c.values[b],
                others_mean,
                converged: c.converged,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_star;
    use approx::assert_relative_eq;

    #[test]
    fn symmetric_rates_lie_on_diagonal() {
        let g = Graph::complete(5).unwrap();
        let mut r = RateMatrix::zeros(5);
        let mut v = 0.3;
        for &(i, j) in g.edges() {
            r.set(i, j, v).unwrap();
            r.set(j, i, v).unwrap();
            v += 0.37;
        }
        let edges: Vec<f64> = (0..=8).map(|k| k as f64 * 0.5).collect();
        let curve = reciprocity_curve(&g, &r, &edges).unwrap();
        for (b, val) in curve.bin_values.iter().enumerate() {
            if let Some(val) = val {
                assert!(*val >= edges[b] && *val <= edges[b + 1]);
            }
        }
        assert_eq!(curve.bin_counts.iter().sum::<usize>(), 20);
    }

    #[test]
    fn one_way_rates_give_zero_curve() {
        let g = Graph::path(4).unwrap();
        let mut r = RateMatrix::zeros(4);
        r.set(0, 1, 1.0).unwrap();
        r.set(1, 2, 2.0).unwrap();
        r.set(2, 3, 0.5).unwrap();
        let curve = reciprocity_curve(&g, &r, &[0.0, 1.0, 3.0]).unwrap();
        assert!(curve.bin_values.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn outlying_pair_choice() {
        // Leaves 3 and 4 hang off a triangle and are adjacent to each other.
        let g = Graph::new(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (0, 4)]).unwrap();
        assert_eq!(outlying_pair(&g).unwrap(), (3, 4));
        // No two minimum-degree nodes are adjacent in a star: smallest degree sum.
        assert_eq!(outlying_pair(&generate_star(5).unwrap()).unwrap(), (0, 1));
    }

    #[test]
    fn baseline_point_reproduces_solve() {
        let g = Graph::complete(4).unwrap();
        let r = RateMatrix::uniform(&g, 1.5).unwrap();
        let opts = SolverOptions::default();
        let pts = coalition_sweep(&g, &r, 0, 1, &[1.5], &opts).unwrap();
        let base = likedness_centrality(&g, &r, &opts).unwrap();
        assert_relative_eq!(pts[0].member_a, base.values[0], epsilon = 1e-12);
        assert_relative_eq!(pts[0].others_mean, 0.25, epsilon = 1e-9);
    }

    #[test]
    fn zero_joint_rate_matches_direct_removal() {
        let g = Graph::complete(4).unwrap();
        let mut r = RateMatrix::uniform(&g, 1.0).unwrap();
        r.set(2, 3, 2.0).unwrap();
        let opts = SolverOptions::default();
        let pts = coalition_sweep(&g, &r, 0, 1, &[0.0], &opts).unwrap();
        let mut direct = r.clone();
        direct.set(0, 1, 0.0).unwrap();
        direct.set(1, 0, 0.0).unwrap();
        let c = likedness_centrality(&g, &direct, &opts).unwrap();
        assert_relative_eq!(pts[0].member_a, c.values[0], epsilon = 1e-12);
        assert_relative_eq!(pts[0].member_b, c.values[1], epsilon = 1e-12);
    }

    #[test]
    fn sweep_rejects_bad_pairs() {
        let g = Graph::path(3).unwrap();
        let r = RateMatrix::uniform(&g, 1.0).unwrap();
        let opts = SolverOptions::default();
        assert!(coalition_sweep(&g, &r, 1, 1, &[1.0], &opts).is_err());
        assert!(coalition_sweep(&g, &r, 0, 2, &[1.0], &opts).is_err());
    }
}
