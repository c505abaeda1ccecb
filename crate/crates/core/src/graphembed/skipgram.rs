use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{generate_walks, GraphError, NodeKind, UserTagGraph, WalkConfig};
use crate::neural::sigmoid;
use crate::textvec::{read_text_vectors, write_text_vectors};

const NOISE_EXPONENT: f64 = 0.75;

/// Learned node vectors keyed by `u:<id>` / `t:<tag>`.
///
/// During training two tables are kept: the input vectors (the exported
/// embedding) and the output/context vectors used only by the skip-gram
/// objective. Row `i` belongs to `keys()[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeEmbeddings {
    dim: usize,
    keys: Vec<String>,
    index: HashMap<String, usize>,
    input: Vec<f64>,
    output: Vec<f64>,
}

impl NodeEmbeddings {
    /// Input rows uniform in `(-0.5/dim, 0.5/dim)`, output rows zero.
    pub fn initialize(keys: Vec<String>, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let half = 0.5 / dim.max(1) as f64;
        let input = (0..keys.len() * dim)
            .map(|_| rng.gen_range(-half..half))
            .collect();
        let output = vec![0.0; keys.len() * dim];
        let index = keys.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        Self {
            dim,
            keys,
            index,
            input,
            output,
        }
    }

    /// Assembles a table from row-major input and context values.
    pub fn from_tables(
        keys: Vec<String>,
        dim: usize,
        input: Vec<f64>,
        output: Vec<f64>,
    ) -> Result<Self, GraphError> {
        if input.len() != keys.len() * dim || output.len() != input.len() {
            return Err(GraphError::Config(format!(
                "{} keys of dimension {dim} need {} values per table",
                keys.len(),
                keys.len() * dim
            )));
        }
        let index = keys.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        Ok(Self {
            dim,
            keys,
            index,
            input,
            output,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn row(&self, node: usize) -> &[f64] {
        &self.input[node * self.dim..(node + 1) * self.dim]
    }

    pub fn context_row(&self, node: usize) -> &[f64] {
        &self.output[node * self.dim..(node + 1) * self.dim]
    }

    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.index.get(key).map(|&i| self.row(i))
    }

    /// Writes the input table in the vector text format.
    pub fn write_text<W: Write>(&self, w: W) -> Result<(), GraphError> {
        let rows = (0..self.len()).map(|i| (self.keys[i].as_str(), self.row(i)));
        write_text_vectors(w, self.dim, rows)?;
        Ok(())
    }

    /// Reads an exported table. The context table is not part of the export
    /// and comes back zeroed.
    pub fn read_text<R: BufRead>(r: R) -> Result<Self, GraphError> {
        let file = read_text_vectors(r)?;
        let dim = file.dim;
        let mut keys = Vec::with_capacity(file.rows.len());
        let mut input = Vec::with_capacity(file.rows.len() * dim);
        for (k, v) in file.rows {
            keys.push(k);
            input.extend(v);
        }
        let index = keys.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        let output = vec![0.0; input.len()];
        Ok(Self {
            dim,
            keys,
            index,
            input,
            output,
        })
    }
}

/// Cumulative noise distribution proportional to `count^0.75`.
struct NoiseSampler {
    cumulative: Vec<f64>,
}

impl NoiseSampler {
    fn new(counts: &[u64]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(NOISE_EXPONENT);
                acc
            })
            .collect();
        Self { cumulative }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty");
        let u = rng.gen::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }
}

/// Skip-gram with negative sampling over the walks.
///
/// Every (center, context) pair within `config.window` positions is a
/// positive example; `config.negatives` noise nodes per positive are drawn
/// from the walk-frequency distribution raised to 0.75. Plain SGD with a
/// learning rate decaying linearly to zero over all epochs. Walk order is
/// reshuffled each epoch. Single-threaded and deterministic given the seed.
pub fn train_skipgram(
    walks: &[Vec<usize>],
    keys: Vec<String>,
    dim: usize,
    config: &WalkConfig,
) -> Result<NodeEmbeddings, GraphError> {
    config.validate()?;
    if walks.iter().all(Vec::is_empty) {
        return Err(GraphError::NoWalks);
    }
    let n = keys.len();
    if let Some(&bad) = walks.iter().flatten().find(|&&v| v >= n) {
        return Err(GraphError::UnknownNode(bad));
    }
    let mut emb = NodeEmbeddings::initialize(keys, dim, config.seed);
    if config.epochs == 0 {
        return Ok(emb);
    }

    let mut counts = vec![0u64; n];
    for &v in walks.iter().flatten() {
        counts[v] += 1;
    }
    let noise = NoiseSampler::new(&counts);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(2);

    let total_centers = (config.epochs * walks.iter().map(Vec::len).sum::<usize>()) as f64;
    let mut done = 0usize;
    let mut order: Vec<usize> = (0..walks.len()).collect();
    let mut grad_center = vec![0.0; dim];
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &wi in &order {
            let walk = &walks[wi];
            for (pos, &center) in walk.iter().enumerate() {
                let lr = config.learning_rate * (1.0 - done as f64 / total_centers).max(1e-4);
                done += 1;
                let lo = pos.saturating_sub(config.window);
                let hi = (pos + config.window + 1).min(walk.len());
                for (cpos, &context) in walk.iter().enumerate().take(hi).skip(lo) {
                    if cpos == pos {
                        continue;
                    }
                    grad_center.fill(0.0);
                    sgns_update(&mut emb, center, context, 1.0, lr, &mut grad_center);
                    for _ in 0..config.negatives {
                        let neg = noise.sample(&mut rng);
                        if neg == context {
                            continue;
                        }
                        sgns_update(&mut emb, center, neg, 0.0, lr, &mut grad_center);
                    }
                    let row = &mut emb.input[center * dim..(center + 1) * dim];
                    for (r, g) in row.iter_mut().zip(&grad_center) {
                        *r += g;
                    }
                }
            }
        }
    }
    Ok(emb)
}

fn sgns_update(
    emb: &mut NodeEmbeddings,
    center: usize,
    target: usize,
    label: f64,
    lr: f64,
    grad_center: &mut [f64],
) {
    let d = emb.dim;
    let input = &emb.input[center * d..(center + 1) * d];
    let output = &mut emb.output[target * d..(target + 1) * d];
    let score: f64 = input.iter().zip(output.iter()).map(|(a, b)| a * b).sum();
    let g = lr * (label - sigmoid(score));
    for i in 0..d {
        grad_center[i] += g * output[i];
        output[i] += g * input[i];
    }
}

/// Walks the graph and trains node vectors of dimension `dim`.
pub fn embed_graph(
    graph: &UserTagGraph,
    dim: usize,
    config: &WalkConfig,
) -> Result<NodeEmbeddings, GraphError> {
    let walks = generate_walks(graph, config)?;
    let keys = (0..graph.node_count()).map(|i| graph.key(i)).collect();
    train_skipgram(&walks, keys, dim, config)
}

/// The user's vector, or all zeros for a user absent from training.
pub fn user_vector(embeddings: &NodeEmbeddings, user_id: &str) -> Vec<f64> {
    let key = format!("{}{user_id}", NodeKind::User.prefix());
    embeddings
        .get(&key)
        .map_or_else(|| vec![0.0; embeddings.dim()], <[f64]>::to_vec)
}
