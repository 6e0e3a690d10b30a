//! Undirected, unweighted graphs and the structural metrics used to
//! characterise them: degree spread, mean geodesic distance and mean local
//! clustering.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Simple undirected graph on nodes `0..n`.
///
/// Edges are stored once, as `(low, high)` pairs in sorted order, so two
/// graphs with the same edge set compare equal regardless of how they were
/// built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph(
                "graph must have at least one node".into(),
            ));
        }
        let mut normalized = Vec::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) out of range for {n} nodes"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at node {a}")));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &normalized {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        Ok(Self {
            n,
            edges: normalized,
            adjacency,
        })
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!(
                "cycle needs n >= 3, got {n}"
            )));
        }
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|i| (i - 1, i)))
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Undirected edges as sorted `(low, high)` pairs.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Both orientations of every edge, `(i, j)` then `(j, i)`.
    pub fn directed_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().flat_map(|&(a, b)| [(a, b), (b, a)])
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && self.adjacency[i].binary_search(&j).is_ok()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Graph with node `i` of `self` relabelled as `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::InvalidParameter(
                "permutation length mismatch".into(),
            ));
        }
        Self::new(self.n, self.edges.iter().map(|&(a, b)| (perm[a], perm[b])))
    }

    pub fn without_edge(&self, i: usize, j: usize) -> Result<Self> {
        let key = (i.min(j), i.max(j));
        if !self.edges.contains(&key) {
            return Err(Error::InvalidParameter(format!("no edge ({i}, {j})")));
        }
        Self::new(self.n, self.edges.iter().copied().filter(|&e| e != key))
    }

    /// Hop distances from `source`; unreachable nodes are `None`.
    pub fn bfs_distances(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.bfs_distances(0).iter().all(Option::is_some)
    }

    /// Serialises to the edge-list text format: a `n=<N>` header followed by
    /// one `i j` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n={}\n", self.n);
        for &(a, b) in &self.edges {
            let _ = writeln!(out, "{a} {b}");
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(idx, l)| (idx + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line_no, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing header line `n=<N>`".into(),
        })?;
        let n = header
            .strip_prefix("n=")
            .and_then(|v| v.trim().parse::<usize>().ok())
            .ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("expected `n=<N>`, found `{header}`"),
            })?;
        let mut edges = Vec::new();
        for (line_no, line) in lines {
            let mut fields = line.split_whitespace();
            let parse = |f: Option<&str>| -> Result<usize> {
                f.and_then(|s| s.parse().ok()).ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: format!("expected `i j`, found `{line}`"),
                })
            };
            let a = parse(fields.next())?;
            let b = parse(fields.next())?;
            if fields.next().is_some() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("trailing fields in `{line}`"),
                });
            }
            edges.push((a, b));
        }
        Self::new(n, edges)
    }
}

/// Barabási-Albert preferential attachment.
///
/// Starts from a `k`-clique on nodes `0..k`. Each subsequent node attaches
/// to `k` distinct existing nodes, drawn one at a time with probability
/// proportional to current degree and without replacement. For `k >= 2` this
/// produces `k(k-1)/2 + k(n-k)` edges (17 for `n = 10, k = 2`).
pub fn generate_ba(n: usize, k: usize, seed: u64) -> Result<Graph> {
    if k < 1 || n < k {
        return Err(Error::InvalidParameter(format!(
            "Barabási-Albert needs n >= k >= 1, got n={n}, k={k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(k * n);
    let mut degree = vec![0usize; n];
    for i in 0..k {
        for j in i + 1..k {
            edges.push((i, j));
            degree[i] += 1;
            degree[j] += 1;
        }
    }
    let mut weights = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(k);
    for new in k..n {
        weights.clear();
        weights.extend(degree[..new].iter().map(|&d| d as f64));
        targets.clear();
        for _ in 0..k {
            let t = draw_weighted(&weights, &mut rng);
            weights[t] = -1.0;
            targets.push(t);
        }
        for &t in &targets {
            edges.push((t, new));
            degree[t] += 1;
            degree[new] += 1;
        }
    }
    Graph::new(n, edges)
}

// Entries with negative weight are already taken. When every remaining
// weight is zero (only possible for the k = 1 seed node) falls back to a
// uniform draw over what is left.
fn draw_weighted(weights: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = weights.iter().filter(|w| **w > 0.0).sum();
    if total <= 0.0 {
        let open: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] >= 0.0).collect();
        return open[rng.random_range(0..open.len())];
    }
    let mut x = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        last = i;
        if x < w {
            return i;
        }
        x -= w;
    }
    last
}

/// Star on `n` nodes with node 0 as hub.
pub fn generate_star(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "star needs n >= 2, got {n}"
        )));
    }
    Graph::new(n, (1..n).map(|leaf| (0, leaf)))
}

/// Average geodesic distance over unordered pairs of distinct nodes.
pub fn mean_path_length(g: &Graph) -> Result<f64> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "mean path length needs at least two nodes".into(),
        ));
    }
    let mut total = 0usize;
    for source in 0..n {
        for d in g.bfs_distances(source).iter().skip(source + 1) {
            total += d.ok_or(Error::Disconnected)?;
        }
    }
    let pairs = n * (n - 1) / 2;
    Ok(total as f64 / pairs as f64)
}

pub fn local_clustering(g: &Graph, i: usize) -> f64 {
    let nbrs = g.neighbors(i);
    let d = nbrs.len();
    if d < 2 {
        return 0.0;
    }
    let mut links = 0usize;
    for (a, &u) in nbrs.iter().enumerate() {
        for &v in &nbrs[a + 1..] {
            if g.has_edge(u, v) {
                links += 1;
            }
        }
    }
    links as f64 / (d * (d - 1) / 2) as f64
}

/// Mean of local clustering coefficients; nodes of degree < 2 count as 0.
pub fn mean_local_clustering(g: &Graph) -> f64 {
    let n = g.node_count();
    (0..n).map(|i| local_clustering(g, i)).sum::<f64>() / n as f64
}

/// Population standard deviation of node degrees.
pub fn degree_stddev(g: &Graph) -> f64 {
    let degrees = g.degrees();
    let n = degrees.len() as f64;
    let mean = degrees.iter().sum::<usize>() as f64 / n;
    let var = degrees
        .iter()
        .map(|&d| (d as f64 - mean).powi(2))
        .sum::<f64>()
        / n;
    var.sqrt()
}

/// `hist[d]` is the number of nodes with degree `d`, for `d` in `0..n`.
pub fn degree_histogram(g: &Graph) -> Vec<usize> {
    let mut hist = vec![0; g.node_count()];
    for d in g.degrees() {
        hist[d] += 1;
    }
    hist
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphMetrics {
    pub degree_histogram: Vec<usize>,
    pub degree_stddev: f64,
    /// `None` when the graph is disconnected.
    pub mean_path_length: Option<f64>,
    pub mean_local_clustering: f64,
    pub connected: bool,
}

impl GraphMetrics {
    pub fn compute(g: &Graph) -> Self {
        let mean_path_length = mean_path_length(g).ok();
        Self {
            degree_histogram: degree_histogram(g),
            degree_stddev: degree_stddev(g),
            connected: mean_path_length.is_some() || g.node_count() == 1,
            mean_path_length,
            mean_local_clustering: mean_local_clustering(g),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn triangle() -> Graph {
        Graph::complete(3).unwrap()
    }

    #[test]
    fn rejects_malformed_edges() {
        assert!(Graph::new(3, [(0, 0)]).is_err());
        assert!(Graph::new(3, [(0, 3)]).is_err());
        assert!(Graph::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(0, []).is_err());
    }

    #[test]
    fn ba_small_cases() {
        let g = generate_ba(3, 2, 1).unwrap();
        assert_eq!(g, triangle());
        let g = generate_ba(2, 2, 1).unwrap();
        assert_eq!(g.edge_count(), 1);
        let g = generate_ba(5, 1, 3).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert!(g.is_connected());
    }

    #[test]
    fn ba_edge_count_n10_k2() {
        for seed in 0..50 {
            let g = generate_ba(10, 2, seed).unwrap();
            assert_eq!(g.edge_count(), 17);
            assert!(g.is_connected());
            assert!(g.degrees().iter().all(|&d| d >= 2));
        }
    }

    #[test]
    fn ba_is_deterministic() {
        assert_eq!(
            generate_ba(10, 2, 7).unwrap(),
            generate_ba(10, 2, 7).unwrap()
        );
        let distinct = (0..20)
            .map(|s| generate_ba(10, 2, s).unwrap().edges().to_vec())
            .collect::<std::collections::BTreeSet<_>>();
        assert!(distinct.len() > 1);
    }

    #[test]
    fn ba_invalid_parameters() {
        assert!(matches!(
            generate_ba(1, 2, 0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            generate_ba(5, 0, 0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn star_shape() {
        assert_eq!(generate_star(2).unwrap().edge_count(), 1);
        let s = generate_star(10).unwrap();
        assert_eq!(s.edge_count(), 9);
        assert_eq!(s.degree(0), 9);
        assert!((1..10).all(|i| s.degree(i) == 1));
        assert!(generate_star(1).is_err());
    }

    #[test]
    fn path_lengths() {
        assert_relative_eq!(mean_path_length(&triangle()).unwrap(), 1.0);
        assert_relative_eq!(
            mean_path_length(&Graph::path(3).unwrap()).unwrap(),
            4.0 / 3.0
        );
        assert_relative_eq!(mean_path_length(&generate_star(10).unwrap()).unwrap(), 1.8);
        let split = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(mean_path_length(&split), Err(Error::Disconnected)));
    }

    #[test]
    fn clustering_values() {
        assert_relative_eq!(mean_local_clustering(&triangle()), 1.0);
        assert_eq!(mean_local_clustering(&generate_star(7).unwrap()), 0.0);
        let k4_minus = Graph::complete(4).unwrap().without_edge(0, 1).unwrap();
        assert_relative_eq!(mean_local_clustering(&k4_minus), 5.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn degree_spread() {
        assert_eq!(degree_stddev(&triangle()), 0.0);
        assert_eq!(degree_stddev(&Graph::cycle(10).unwrap()), 0.0);
        assert_relative_eq!(
            degree_stddev(&generate_star(10).unwrap()),
            2.4,
            epsilon = 1e-12
        );
    }

    #[test]
    fn metrics_bundle() {
        let m = GraphMetrics::compute(&generate_star(10).unwrap());
        assert_eq!(m.degree_histogram.iter().sum::<usize>(), 10);
        assert_eq!(m.degree_histogram[1], 9);
        assert_eq!(m.degree_histogram[9], 1);
        assert!(m.connected);
        let split = GraphMetrics::compute(&Graph::new(4, [(0, 1), (2, 3)]).unwrap());
        assert!(!split.connected);
        assert_eq!(split.mean_path_length, None);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = generate_ba(10, 2, 11).unwrap();
        let text = g.to_edge_list();
        assert!(text.starts_with("n=10\n"));
        assert_eq!(Graph::from_edge_list(&text).unwrap(), g);
        assert!(Graph::from_edge_list("0 1\n").is_err());
        assert!(Graph::from_edge_list("n=3\n0 x\n").is_err());
    }
}
