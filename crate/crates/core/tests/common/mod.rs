//! Test-only helpers: random instances and an independent reference solver
//! that shares no code with the library.
#![allow(dead_code)]

use likenet::{Graph, RateMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random spanning tree plus each remaining pair with probability `p`.
pub fn random_connected(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Graph {
    let mut edges = Vec::new();
    for i in 1..n {
        edges.push((rng.random_range(0..i), i));
    }
    for a in 0..n {
        for b in a + 1..n {
            if !edges.contains(&(a, b)) && rng.random_bool(p) {
                edges.push((a, b));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

pub fn random_rates(g: &Graph, low: f64, high: f64, rng: &mut ChaCha8Rng) -> RateMatrix {
    let mut r = RateMatrix::zeros(g.node_count());
    for (i, j) in g.directed_edges() {
        r.set(i, j, rng.random_range(low..high)).unwrap();
    }
    r
}

/// Plain dense copy of a system.
pub struct Dense {
    pub adj: Vec<Vec<bool>>,
    pub rates: Vec<Vec<f64>>,
}

impl Dense {
    pub fn of(g: &Graph, r: &RateMatrix) -> Self {
        let n = g.node_count();
        let mut adj = vec![vec![false; n]; n];
        let mut rates = vec![vec![0.0; n]; n];
        for a in 0..n {
            for b in 0..n {
                adj[a][b] = g.has_edge(a, b);
                rates[a][b] = r.get(a, b);
            }
        }
        Self { adj, rates }
    }

    fn image(&self, l: &[f64]) -> Vec<f64> {
        let n = l.len();
        (0..n)
            .map(|i| {
                let num: f64 = (0..n).map(|j| self.rates[i][j] * l[j]).sum();
                let den: f64 = (0..n).filter(|&j| self.adj[i][j]).map(|j| l[j]).sum();
                if den > 0.0 {
                    num / den
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Undamped iteration `L <- F(L)` from a uniform start until the
    /// successive change drops below `tol`. Panics if it never does.
    pub fn reference_raw(&self, tol: f64) -> Vec<f64> {
        let n = self.adj.len();
        let mut l = vec![1.0 / n as f64; n];
        for _ in 0..2_000_000 {
            let next = self.image(&l);
            let change = l
                .iter()
                .zip(&next)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            l = next;
            if change < tol {
                return l;
            }
        }
        panic!("reference iteration did not settle");
    }

    pub fn reference_normalized(&self, tol: f64) -> Vec<f64> {
        let raw = self.reference_raw(tol);
        let total: f64 = raw.iter().sum();
        raw.iter().map(|v| v / total).collect()
    }

    /// Forward-difference stability with 1% steps on the normalized vector.
    pub fn reference_stability(&self, tol: f64) -> f64 {
        let n = self.adj.len();
        let base = self.reference_normalized(tol);
        let mut sq = 0.0;
        for (i, &base_i) in base.iter().enumerate() {
            for j in 0..n {
                if !self.adj[i][j] {
                    continue;
                }
                // Agent i's outgoing rate towards j lives at rates[j][i].
                let rate = self.rates[j][i];
                let step = if rate < 1e-8 { 1e-4 } else { 0.01 * rate };
                let mut bumped = Dense {
                    adj: self.adj.clone(),
                    rates: self.rates.clone(),
                };
                bumped.rates[j][i] += step;
                let d = (bumped.reference_normalized(tol)[i] - base_i) / step;
                sq += d * d;
            }
        }
        (-sq).exp()
    }
}
