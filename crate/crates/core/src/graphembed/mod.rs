//! User–tag graph and node2vec embeddings.
//!
//! The graph joins every user to every tag they have used. Node vectors are
//! learned by sampling second-order biased random walks and fitting a
//! skip-gram model with negative sampling to the walk co-occurrences. The
//! exact softmax neighborhood likelihood ([`exact_objective`]) is provided
//! for small graphs as a check on training.

mod graph;
mod objective;
mod skipgram;
mod walk;

pub use graph::{NodeKind, UserTagGraph};
pub use objective::{adjacency_neighborhoods, exact_objective};
pub use skipgram::{embed_graph, train_skipgram, user_vector, NodeEmbeddings};
pub use walk::{generate_walks, transition_probs, AdjacencyGraph, WalkConfig, WalkGraph};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("node {0} has no neighbors")]
    NoNeighbors(usize),
    #[error("node index {0} is out of range")]
    UnknownNode(usize),
    #[error("previous node {prev} is not adjacent to {cur}")]
    NotAdjacent { prev: usize, cur: usize },
    #[error("cannot walk an empty graph")]
    EmptyGraph,
    #[error("no walks to train on")]
    NoWalks,
    #[error("invalid walk configuration: {0}")]
    Config(String),
    #[error("line {line}: {message}")]
    EdgeList { line: usize, message: String },
    #[error("name {0:?} cannot be stored in an edge list")]
    Name(String),
    #[error(transparent)]
    Format(#[from] crate::textvec::FormatError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
