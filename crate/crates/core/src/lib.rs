//! Tag recommendation from question content and asker history.
//!
//! The pipeline has three learned parts:
//!
//! 1. a chained GRU content encoder: the title is folded from a zero state,
//!    and the body is folded starting from the title's final state;
//! 2. node2vec user vectors learned over the bipartite user–tag graph;
//! 3. a fusion layer (addition or concatenation) followed by a dense layer
//!    and an element-wise sigmoid over the tag vocabulary.
//!
//! [`corpus`] turns JSON-lines questions into fixed-length index sequences;
//! [`neural`] is the small dense kernel (GRU with backpropagation through
//! time, dense layer, loss, Adam, dropout, gradient checking);
//! [`graphembed`] builds the user–tag graph and trains node embeddings;
//! [`recommender`] assembles and trains the model and reads/writes
//! checkpoints; [`evalkit`] computes the ranking metrics.

pub mod corpus;
pub mod evalkit;
pub mod graphembed;
pub mod neural;
pub mod recommender;
pub mod textvec;

pub use corpus::{EmbeddingTable, EncodedQuestion, QuestionRecord, TagVocabulary, Vocabulary};
pub use evalkit::{EvalInstance, MetricsReport};
pub use graphembed::{NodeEmbeddings, UserTagGraph, WalkConfig};
pub use neural::{DenseParams, GruParams, GruTrace, Matrix, OptimizerState};
pub use recommender::{AggregationMode, Checkpoint, ModelConfig, ModelParams, TrainConfig, UserEmbeddings};
