//! Question ingestion: parsing, tokenization, vocabularies, pretrained word
//! vectors and fixed-length encoding with multi-hot targets.

mod embedding;
mod encode;
mod record;
mod tokenize;
mod vocab;

pub use embedding::{load_embeddings, EmbeddingTable};
pub use encode::{encode_question, make_target, EncodedQuestion, DEFAULT_MAX_LEN};
pub use record::{parse_dataset, QuestionRecord};
pub use tokenize::tokenize;
pub use vocab::{build_vocab, TagVocabulary, Vocabulary};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Record { line: usize, message: String },
    #[error("line {line}: duplicate question id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("cannot build a vocabulary from an empty record list")]
    EmptyRecords,
    #[error("min_count must be at least 1, got {0}")]
    MinCount(usize),
    #[error("duplicate token {0:?} in vocabulary listing")]
    DuplicateToken(String),
    #[error("tag vocabulary must contain at least one tag")]
    EmptyTagVocabulary,
    #[error("embedding table has {found} rows, vocabulary needs {expected}")]
    TableShape { expected: usize, found: usize },
    #[error(transparent)]
    Format(#[from] crate::textvec::FormatError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
