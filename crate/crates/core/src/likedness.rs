//! Likedness centrality and the eigenvector-style reference model.
//!
//! Likedness centrality is the fixed point of
//!
//! ```text
//! L_i = sum_j R[i][j] * L_j / sum_j G[i][j] * L_j
//! ```
//!
//! Each agent weighs the likes it receives by the standing of the likers,
//! relative to the total standing of everyone it is connected to. The map is
//! homogeneous of degree zero in `L`, so the fixed point carries the units of
//! the rates and is reported normalized to sum 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rates::RateMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Convergence threshold on `max_i |F(L)_i - L_i|`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Relaxation weight ω in `L <- (1 - ω) L + ω F(L)`.
    pub relaxation: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 10_000,
            relaxation: 0.5,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be > 0, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidParameter(
                "max_iterations must be >= 1".into(),
            ));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "relaxation must lie in (0, 1], got {}",
                self.relaxation
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityVector {
    /// Normalized to sum 1.
    pub values: Vec<f64>,
    /// Unnormalized fixed point, in rate units.
    pub raw: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Max-norm residual at the returned iterate.
    pub residual: f64,
}

/// Evaluates the right-hand side `F(L)` into `out`. Nodes whose
/// neighbourhood currently has zero total standing map to 0.
fn likedness_map(g: &Graph, r: &RateMatrix, l: &[f64], out: &mut [f64]) {
    for (i, slot) in out.iter_mut().enumerate() {
        let mut received = 0.0;
        let mut standing = 0.0;
        for &j in g.neighbors(i) {
            received += r.get(i, j) * l[j];
            standing += l[j];
        }
        *slot = if standing > 0.0 {
            received / standing
        } else {
            0.0
        };
    }
}

fn normalized(raw: &[f64]) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    raw.iter().map(|v| v / total).collect()
}

/// Solves for likedness centrality by damped successive substitution from a
/// uniform start.
///
/// Hitting `max_iterations` is not an error: the lowest-residual iterate is
/// returned with `converged == false`.
pub fn likedness_centrality(
    g: &Graph,
    r: &RateMatrix,
    opts: &SolverOptions,
) -> Result<CentralityVector> {
    let n = g.node_count();
    let start = vec![1.0 / n as f64; n];
    likedness_centrality_from(g, r, opts, &start)
}

/// Same as [`likedness_centrality`] with an explicit positive starting vector.
pub fn likedness_centrality_from(
    g: &Graph,
    r: &RateMatrix,
    opts: &SolverOptions,
    start: &[f64],
) -> Result<CentralityVector> {
    opts.validate()?;
    r.check_compatible(g)?;
    let n = g.node_count();
    if g.edge_count() == 0 {
        return Err(Error::Degenerate("graph has no edges".into()));
    }
    if start.len() != n || start.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidParameter(
            "starting vector must have n finite positive entries".into(),
        ));
    }

    let isolated: Vec<bool> = (0..n).map(|i| g.degree(i) == 0).collect();
    let mut current: Vec<f64> = start
        .iter()
        .zip(&isolated)
        .map(|(&v, &iso)| if iso { 0.0 } else { v })
        .collect();
    let mut image = vec![0.0; n];
    let mut best = current.clone();
    let mut best_residual = f64::INFINITY;
    let omega = opts.relaxation;

    for iteration in 1..=opts.max_iterations {
        likedness_map(g, r, &current, &mut image);
        if image.iter().all(|&v| v == 0.0) {
            return Err(Error::Degenerate(
                "every node receives zero weighted likes; no nontrivial fixed point".into(),
            ));
        }
        let residual = current
            .iter()
            .zip(&image)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if residual < best_residual {
            best_residual = residual;
            best.copy_from_slice(&current);
        }
        if residual <= opts.tolerance {
            return Ok(CentralityVector {
                values: normalized(&current),
                raw: current,
                converged: true,
                iterations: iteration,
                residual,
            });
        }
        for (c, f) in current.iter_mut().zip(&image) {
            *c = (1.0 - omega) * *c + omega * f;
        }
    }

    Ok(CentralityVector {
        values: normalized(&best),
        raw: best,
        converged: false,
        iterations: opts.max_iterations,
        residual: best_residual,
    })
}

/// Dominant eigenvector of the rate matrix, `L = (1/λ) R L`, by power
/// iteration on `R + I`.
///
/// The unit shift leaves eigenvectors unchanged and keeps the Perron root
/// strictly dominant in magnitude, so bipartite supports (for example a
/// single edge) do not oscillate. Isolated nodes are pinned at 0.
pub fn eigenvector_centrality(
    g: &Graph,
    r: &RateMatrix,
    opts: &SolverOptions,
) -> Result<CentralityVector> {
    opts.validate()?;
    r.check_compatible(g)?;
    let n = g.node_count();
    if g.directed_edges().all(|(i, j)| r.get(i, j) == 0.0) {
        return Err(Error::Degenerate("rate matrix is identically zero".into()));
    }
    let active: Vec<bool> = (0..n).map(|i| g.degree(i) > 0).collect();
    let count = active.iter().filter(|a| **a).count() as f64;
    let mut x: Vec<f64> = active
        .iter()
        .map(|&a| if a { 1.0 / count } else { 0.0 })
        .collect();
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;

    for iteration in 1..=opts.max_iterations {
        for i in 0..n {
            next[i] = if active[i] {
                x[i] + g
                    .neighbors(i)
                    .iter()
                    .map(|&j| r.get(i, j) * x[j])
                    .sum::<f64>()
            } else {
                0.0
            };
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        residual = x
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut x, &mut next);
        if residual <= opts.tolerance {
            return Ok(CentralityVector {
                values: x.clone(),
                raw: x,
                converged: true,
                iterations: iteration,
                residual,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iterations,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_star;
    use approx::assert_relative_eq;

    fn pair(a: f64, b: f64) -> (Graph, RateMatrix) {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let r = RateMatrix::from_rows(&[vec![0.0, a], vec![b, 0.0]]).unwrap();
        (g, r)
    }

    #[test]
    fn two_node_forced_point() {
        let (g, r) = pair(3.0, 1.0);
        let c = likedness_centrality(&g, &r, &SolverOptions::default()).unwrap();
        assert!(c.converged);
        assert_relative_eq!(c.values[0], 0.75, epsilon = 1e-9);
        assert_relative_eq!(c.values[1], 0.25, epsilon = 1e-9);
        assert_relative_eq!(c.raw[0], 3.0, epsilon = 1e-9);
    }

    #[test]
    fn symmetric_triangle_is_uniform() {
        let g = Graph::complete(3).unwrap();
        let r = RateMatrix::uniform(&g, 2.5).unwrap();
        let c = likedness_centrality(&g, &r, &SolverOptions::default()).unwrap();
        for v in &c.values {
            assert_relative_eq!(*v, 1.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn isolated_nodes_are_zero() {
        let g = Graph::new(4, [(0, 1), (1, 2)]).unwrap();
        let mut r = RateMatrix::uniform(&g, 1.0).unwrap();
        r.set(0, 1, 2.0).unwrap();
        let c = likedness_centrality(&g, &r, &SolverOptions::default()).unwrap();
        assert!(c.converged);
        assert_eq!(c.values[3], 0.0);
        assert_eq!(c.raw[3], 0.0);
        assert_relative_eq!(c.values.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn all_zero_rates_are_degenerate() {
        let g = Graph::complete(3).unwrap();
        let r = RateMatrix::zeros(3);
        assert!(matches!(
            likedness_centrality(&g, &r, &SolverOptions::default()),
            Err(Error::Degenerate(_))
        ));
        let empty = Graph::new(3, []).unwrap();
        assert!(likedness_centrality(&empty, &r, &SolverOptions::default()).is_err());
    }

    #[test]
    fn incompatible_inputs_rejected() {
        let g = generate_star(4).unwrap();
        let r = RateMatrix::zeros(3);
        assert!(matches!(
            likedness_centrality(&g, &r, &SolverOptions::default()),
            Err(Error::DimensionMismatch { .. })
        ));
        let bad = SolverOptions {
            relaxation: 0.0,
            ..Default::default()
        };
        let r = RateMatrix::uniform(&g, 1.0).unwrap();
        assert!(likedness_centrality(&g, &r, &bad).is_err());
    }

    #[test]
    fn iteration_cap_returns_flagged_iterate() {
        let g = Graph::complete(4).unwrap();
        let mut r = RateMatrix::uniform(&g, 1.0).unwrap();
        r.set(0, 1, 5.0).unwrap();
        let opts = SolverOptions {
            max_iterations: 3,
            ..Default::default()
        };
        let c = likedness_centrality(&g, &r, &opts).unwrap();
        assert!(!c.converged);
        assert_eq!(c.iterations, 3);
        assert!(c.residual.is_finite());
    }

    #[test]
    fn eigenvector_two_node() {
        let (g, r) = pair(4.0, 1.0);
        let c = eigenvector_centrality(&g, &r, &SolverOptions::default()).unwrap();
        assert_relative_eq!(c.values[0], 2.0 / 3.0, epsilon = 1e-9);
        assert_relative_eq!(c.values[1], 1.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn eigenvector_symmetric_and_scale_free() {
        let g = Graph::complete(3).unwrap();
        let r = RateMatrix::uniform(&g, 0.7).unwrap();
        let c = eigenvector_centrality(&g, &r, &SolverOptions::default()).unwrap();
        for v in &c.values {
            assert_relative_eq!(*v, 1.0 / 3.0, epsilon = 1e-10);
        }
        let (g, r) = pair(3.0, 1.0);
        let base = eigenvector_centrality(&g, &r, &SolverOptions::default()).unwrap();
        let scaled =
            eigenvector_centrality(&g, &r.scaled(6.5).unwrap(), &SolverOptions::default()).unwrap();
        for (a, b) in base.values.iter().zip(&scaled.values) {
            assert_relative_eq!(*a, *b, epsilon = 1e-9);
        }
    }

    #[test]
    fn eigenvector_reports_non_convergence() {
        let (g, r) = pair(4.0, 1.0);
        let opts = SolverOptions {
            max_iterations: 2,
            ..Default::default()
        };
        assert!(matches!(
            eigenvector_centrality(&g, &r, &opts),
            Err(Error::NoConvergence { .. })
        ));
    }
}
