use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GraphError, UserTagGraph};

/// Read access a random walker needs. Adjacency lists must be sorted by
/// neighbor index.
pub trait WalkGraph: Sync {
    fn node_count(&self) -> usize;
    fn neighbors(&self, node: usize) -> &[(usize, u32)];

    fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.node_count() && self.neighbors(a).binary_search_by_key(&b, |(n, _)| *n).is_ok()
    }
}

impl WalkGraph for UserTagGraph {
    fn node_count(&self) -> usize {
        UserTagGraph::node_count(self)
    }

    fn neighbors(&self, node: usize) -> &[(usize, u32)] {
        UserTagGraph::neighbors(self, node)
    }
}

/// Plain undirected weighted graph over nodes `0..n`, for walking graphs
/// that are not user–tag graphs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AdjacencyGraph {
    adjacency: Vec<Vec<(usize, u32)>>,
}

impl AdjacencyGraph {
    /// Undirected edges; self-loops are rejected and a repeated pair keeps
    /// the sum of its weights.
    pub fn from_edges(n: usize, edges: &[(usize, usize, u32)]) -> Result<Self, GraphError> {
        let mut adjacency: Vec<Vec<(usize, u32)>> = vec![Vec::new(); n];
        for &(a, b, w) in edges {
            if a >= n || b >= n {
                return Err(GraphError::UnknownNode(a.max(b)));
            }
            if a == b {
                return Err(GraphError::Config(format!("self-loop on node {a}")));
            }
            for (x, y) in [(a, b), (b, a)] {
                match adjacency[x].iter_mut().find(|(m, _)| *m == y) {
                    Some(e) => e.1 += w,
                    None => adjacency[x].push((y, w)),
                }
            }
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        Ok(Self { adjacency })
    }
}

impl WalkGraph for AdjacencyGraph {
    fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    fn neighbors(&self, node: usize) -> &[(usize, u32)] {
        &self.adjacency[node]
    }
}

/// Random-walk and skip-gram settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    /// Return parameter: weight `1/p` for stepping back to the previous node.
    pub p: f64,
    /// In-out parameter: weight `1/q` for moving away from the previous node.
    pub q: f64,
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Bias steps by edge weight instead of treating the graph as unweighted.
    pub weighted: bool,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            p: 1.0,
            q: 1.0,
            walk_length: 80,
            walks_per_node: 10,
            window: 10,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            weighted: false,
            seed: 42,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<(), GraphError> {
        let fail = |m: &str| Err(GraphError::Config(m.to_owned()));
        if !(self.p > 0.0 && self.p.is_finite()) {
            return fail("p must be positive");
        }
        if !(self.q > 0.0 && self.q.is_finite()) {
            return fail("q must be positive");
        }
        if self.walk_length < 2 {
            return fail("walk length must be at least 2");
        }
        if self.walks_per_node < 1 {
            return fail("walks per node must be at least 1");
        }
        if self.window < 1 {
            return fail("window must be at least 1");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return fail("learning rate must be non-negative");
        }
        Ok(())
    }
}

/// Distribution of the next node of a walk currently at `cur`.
///
/// With a previous node, neighbor `x` of `cur` gets unnormalized weight
/// `w(cur, x) / p` if `x == prev`, `w(cur, x)` if `x` is adjacent to `prev`,
/// and `w(cur, x) / q` otherwise. Without one, the edge weights are simply
/// normalized. When `weighted` is false every edge weight is taken as 1.
pub fn transition_probs<G: WalkGraph + ?Sized>(
    graph: &G,
    prev: Option<usize>,
    cur: usize,
    p: f64,
    q: f64,
    weighted: bool,
) -> Result<Vec<(usize, f64)>, GraphError> {
    if cur >= graph.node_count() {
        return Err(GraphError::UnknownNode(cur));
    }
    let neighbors = graph.neighbors(cur);
    if neighbors.is_empty() {
        return Err(GraphError::NoNeighbors(cur));
    }
    if let Some(prev) = prev {
        if !graph.has_edge(prev, cur) {
            return Err(GraphError::NotAdjacent { prev, cur });
        }
    }
    let mut weights: Vec<(usize, f64)> = neighbors
        .iter()
        .map(|&(x, w)| {
            let w = if weighted { f64::from(w) } else { 1.0 };
            let bias = match prev {
                None => 1.0,
                Some(prev) if x == prev => 1.0 / p,
                Some(prev) if graph.has_edge(x, prev) => 1.0,
                Some(_) => 1.0 / q,
            };
            (x, w * bias)
        })
        .collect();
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    for (_, w) in &mut weights {
        *w /= total;
    }
    Ok(weights)
}

fn sample(probs: &[(usize, f64)], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for &(x, pr) in probs {
        acc += pr;
        if u < acc {
            return x;
        }
    }
    probs.last().expect("non-empty distribution").0
}

/// `walks_per_node` walks of up to `walk_length` nodes from every node.
///
/// Walks are ordered by round, then by start node. Each walk draws from its
/// own RNG stream derived from `(seed, round, start node)`, so the result is
/// deterministic regardless of thread scheduling. A walk stops early only at
/// an isolated node.
pub fn generate_walks<G: WalkGraph + ?Sized>(
    graph: &G,
    config: &WalkConfig,
) -> Result<Vec<Vec<usize>>, GraphError> {
    config.validate()?;
    if graph.node_count() == 0 {
        return Err(GraphError::EmptyGraph);
    }
    let n = graph.node_count();
    let mut walks = Vec::with_capacity(n * config.walks_per_node);
    for round in 0..config.walks_per_node {
        let batch: Result<Vec<_>, _> = (0..n)
            .into_par_iter()
            .map(|start| {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(((round as u64) << 32) | start as u64);
                walk_from(graph, start, config, &mut rng)
            })
            .collect();
        walks.extend(batch?);
    }
    Ok(walks)
}

fn walk_from<G: WalkGraph + ?Sized>(
    graph: &G,
    start: usize,
    config: &WalkConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>, GraphError> {
    let mut walk = Vec::with_capacity(config.walk_length);
    walk.push(start);
    while walk.len() < config.walk_length {
        let cur = walk[walk.len() - 1];
        if graph.neighbors(cur).is_empty() {
            break;
        }
        let prev = walk.len().checked_sub(2).map(|i| walk[i]);
        let probs = transition_probs(graph, prev, cur, config.p, config.q, config.weighted)?;
        walk.push(sample(&probs, rng));
    }
    Ok(walk)
}
