//! Finite-difference sensitivities of likedness centrality to each agent's
//! own outgoing rates, and the stability functional built from them:
//!
//! ```text
//! S(R, G) = exp(-sum over directed edges (i, j) of (dL_i / dR[j][i])^2)
//! ```
//!
//! `R[j][i]` is the rate at which `i` likes `j`, so each term measures how
//! much agent `i` could move its own (normalized) standing by changing one
//! of the rates it controls.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::likedness::{likedness_centrality, CentralityVector, SolverOptions};
use crate::rates::RateMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DifferenceScheme {
    /// `(L(R + δ) - L(R)) / δ`.
    Forward,
    /// `(L(R + δ) - L(R - δ)) / 2δ`.
    Central,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientOptions {
    /// Relative step, as a fraction of the perturbed entry.
    pub step_fraction: f64,
    /// Absolute step used for entries below `zero_threshold`.
    pub zero_step: f64,
    pub zero_threshold: f64,
    pub scheme: DifferenceScheme,
}

impl Default for GradientOptions {
    fn default() -> Self {
        Self {
            step_fraction: 0.01,
            zero_step: 1e-4,
            zero_threshold: 1e-8,
            scheme: DifferenceScheme::Forward,
        }
    }
}

impl GradientOptions {
    pub fn step_for(&self, value: f64) -> f64 {
        if value < self.zero_threshold {
            self.zero_step
        } else {
            self.step_fraction * value
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientEstimate {
    pub value: f64,
    pub step: f64,
    /// All solves feeding the quotient converged.
    pub converged: bool,
}

/// `dL_i / dR[j][i]` for the edge `(i, j)`, against the normalized centrality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeGradient {
    pub liker: usize,
    pub liked: usize,
    pub gradient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityResult {
    pub stability: f64,
    pub gradient_sq_sum: f64,
    pub per_edge_gradients: Vec<EdgeGradient>,
    pub solver_converged: bool,
    /// Normalized centrality at the unperturbed rates.
    pub centrality: Vec<f64>,
}

impl StabilityResult {
    pub fn from_gradients(
        per_edge_gradients: Vec<EdgeGradient>,
        centrality: Vec<f64>,
        solver_converged: bool,
    ) -> Self {
        let gradient_sq_sum = per_edge_gradients
            .iter()
            .map(|e| e.gradient * e.gradient)
            .sum();
        Self {
            stability: stability_from_sq_sum(gradient_sq_sum),
            gradient_sq_sum,
            per_edge_gradients,
            solver_converged,
            centrality,
        }
    }
}

pub fn stability_from_sq_sum(gradient_sq_sum: f64) -> f64 {
    (-gradient_sq_sum).exp()
}

fn perturbed(r: &RateMatrix, row: usize, col: usize, delta: f64) -> Result<RateMatrix> {
    let mut m = r.clone();
    m.set(row, col, r.get(row, col) + delta)?;
    Ok(m)
}

fn gradient_with_base(
    g: &Graph,
    r: &RateMatrix,
    base: &CentralityVector,
    i: usize,
    j: usize,
    solver: &SolverOptions,
    grad: &GradientOptions,
) -> Result<GradientEstimate> {
    let rate = r.get(j, i);
    let step = grad.step_for(rate);
    let up = likedness_centrality(g, &perturbed(r, j, i, step)?, solver)?;
    match grad.scheme {
        DifferenceScheme::Forward => Ok(GradientEstimate {
            value: (up.values[i] - base.values[i]) / step,
            step,
            converged: up.converged && base.converged,
        }),
        DifferenceScheme::Central => {
            // Never step below zero: fall back to a one-sided quotient there.
            if rate - step < 0.0 {
                return Ok(GradientEstimate {
                    value: (up.values[i] - base.values[i]) / step,
                    step,
                    converged: up.converged && base.converged,
                });
            }
            let down = likedness_centrality(g, &perturbed(r, j, i, -step)?, solver)?;
            Ok(GradientEstimate {
                value: (up.values[i] - down.values[i]) / (2.0 * step),
                step,
                converged: up.converged && down.converged,
            })
        }
    }
}

/// Sensitivity of agent `i`'s normalized centrality to the rate at which `i`
/// likes its neighbour `j`.
pub fn centrality_gradient(
    g: &Graph,
    r: &RateMatrix,
    i: usize,
    j: usize,
    solver: &SolverOptions,
    grad: &GradientOptions,
) -> Result<GradientEstimate> {
    if !g.has_edge(i, j) {
        return Err(Error::InvalidParameter(format!(
            "({i}, {j}) is not an edge"
        )));
    }
    let base = likedness_centrality(g, r, solver)?;
    gradient_with_base(g, r, &base, i, j, solver, grad)
}

/// Stability of the system `(R, G)`: one baseline solve plus one perturbed
/// solve per directed edge (two per edge with central differences).
pub fn stability(
    g: &Graph,
    r: &RateMatrix,
    solver: &SolverOptions,
    grad: &GradientOptions,
) -> Result<StabilityResult> {
    let base = likedness_centrality(g, r, solver)?;
    let mut converged = base.converged;
    let mut gradients = Vec::with_capacity(2 * g.edge_count());
    for (i, j) in g.directed_edges() {
        let est = gradient_with_base(g, r, &base, i, j, solver, grad)?;
        converged &= est.converged;
        gradients.push(EdgeGradient {
            liker: i,
            liked: j,
            gradient: est.value,
        });
    }
    Ok(StabilityResult::from_gradients(
        gradients,
        base.values,
        converged,
    ))
}

/// Which tail of the stability distribution is labelled strategic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategicTail {
    /// Largest `S`: smallest incentive to deviate.
    Highest,
    /// Smallest `S`.
    Lowest,
}

impl std::str::FromStr for StrategicTail {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "highest" => Ok(Self::Highest),
            "lowest" => Ok(Self::Lowest),
            other => Err(Error::InvalidParameter(format!(
                "strategic tail must be `highest` or `lowest`, got `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for StrategicTail {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Highest => "highest",
            Self::Lowest => "lowest",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Positions into the input slice, in selection order.
    pub strategic: Vec<usize>,
    /// Remaining positions, ascending.
    pub population: Vec<usize>,
    /// Least extreme stability inside the strategic class.
    pub threshold: f64,
}

/// Number of records selected for `fraction` of `total` (at least one).
pub fn strategic_count(total: usize, fraction: f64) -> usize {
    ((fraction * total as f64).round() as usize).clamp(1, total)
}

/// Splits `stabilities` into the strategic `fraction` at the chosen tail and
/// the rest. Ties are broken by position, lower first.
pub fn classify_strategic(
    stabilities: &[f64],
    fraction: f64,
    tail: StrategicTail,
) -> Result<Partition> {
    if stabilities.is_empty() {
        return Err(Error::Empty("no records to classify".into()));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "strategic fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let mut order: Vec<usize> = (0..stabilities.len()).collect();
    order.sort_by(|&a, &b| {
        let ord = stabilities[a].total_cmp(&stabilities[b]);
        let ord = match tail {
            StrategicTail::Lowest => ord,
            StrategicTail::Highest => ord.reverse(),
        };
        ord.then(a.cmp(&b))
    });
    let count = strategic_count(stabilities.len(), fraction);
    let strategic = order[..count].to_vec();
    let threshold = stabilities[strategic[count - 1]];
    let mut population = order[count..].to_vec();
    population.sort_unstable();
    Ok(Partition {
        strategic,
        population,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pair(a: f64, b: f64) -> (Graph, RateMatrix) {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let r = RateMatrix::from_rows(&[vec![0.0, a], vec![b, 0.0]]).unwrap();
        (g, r)
    }

    #[test]
    fn identities() {
        assert_eq!(stability_from_sq_sum(0.0), 1.0);
        assert_relative_eq!(stability_from_sq_sum(1.0), (-1.0f64).exp(), epsilon = 1e-15);
        let zeros = (0..4)
            .map(|k| EdgeGradient {
                liker: k,
                liked: k + 1,
                gradient: 0.0,
            })
            .collect();
        let s = StabilityResult::from_gradients(zeros, vec![], true);
        assert_eq!(s.stability, 1.0);
    }

    #[test]
    fn zero_rate_uses_absolute_step() {
        let opts = GradientOptions::default();
        assert_eq!(opts.step_for(0.0), 1e-4);
        assert_relative_eq!(opts.step_for(2.0), 0.02);
    }

    #[test]
    fn two_node_gradient_matches_closed_form() {
        let (a, b) = (2.0, 0.5);
        let (g, r) = pair(a, b);
        let est = centrality_gradient(
            &g,
            &r,
            0,
            1,
            &SolverOptions::default(),
            &GradientOptions::default(),
        )
        .unwrap();
        // L_0 = a / (a + b); node 0 likes node 1 at rate b = R[1][0].
        let exact = -a / (a + b).powi(2);
        assert!(est.converged);
        assert!(
            ((est.value - exact) / exact).abs() < 0.02,
            "{} vs {}",
            est.value,
            exact
        );
    }

    #[test]
    fn gradient_requires_edge() {
        let g = Graph::path(3).unwrap();
        let r = RateMatrix::uniform(&g, 1.0).unwrap();
        assert!(centrality_gradient(
            &g,
            &r,
            0,
            2,
            &SolverOptions::default(),
            &GradientOptions::default()
        )
        .is_err());
    }

    #[test]
    fn stability_counts_both_directions() {
        let g = Graph::path(4).unwrap();
        let r = RateMatrix::uniform(&g, 1.0).unwrap();
        let s = stability(
            &g,
            &r,
            &SolverOptions::default(),
            &GradientOptions::default(),
        )
        .unwrap();
        assert_eq!(s.per_edge_gradients.len(), 6);
        let sq: f64 = s
            .per_edge_gradients
            .iter()
            .map(|e| e.gradient.powi(2))
            .sum();
        assert_relative_eq!(s.gradient_sq_sum, sq);
        assert!(s.stability > 0.0 && s.stability <= 1.0);
    }

    #[test]
    fn classify_counts_and_threshold() {
        let s: Vec<f64> = (0..1000)
            .map(|i| ((i * 7919) % 1000) as f64 / 1000.0)
            .collect();
        let p = classify_strategic(&s, 0.1, StrategicTail::Lowest).unwrap();
        assert_eq!(p.strategic.len(), 100);
        assert_eq!(p.population.len(), 900);
        let max_in = p.strategic.iter().map(|&i| s[i]).fold(f64::MIN, f64::max);
        assert_eq!(p.threshold, max_in);
        let p = classify_strategic(&s, 0.1, StrategicTail::Highest).unwrap();
        let min_in = p.strategic.iter().map(|&i| s[i]).fold(f64::MAX, f64::min);
        assert_eq!(p.threshold, min_in);
    }

    #[test]
    fn classify_ties_by_index() {
        let s = vec![0.5; 10];
        let p = classify_strategic(&s, 0.3, StrategicTail::Lowest).unwrap();
        assert_eq!(p.strategic, vec![0, 1, 2]);
        let p = classify_strategic(&s, 0.3, StrategicTail::Highest).unwrap();
        assert_eq!(p.strategic, vec![0, 1, 2]);
    }

    #[test]
    fn classify_errors() {
        assert!(matches!(
            classify_strategic(&[], 0.1, StrategicTail::Lowest),
            Err(Error::Empty(_))
        ));
        assert!(classify_strategic(&[1.0], 1.0, StrategicTail::Lowest).is_err());
        assert!(classify_strategic(&[1.0], 0.0, StrategicTail::Lowest).is_err());
    }
}
