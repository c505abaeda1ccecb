use std::io::BufRead;

use rand::Rng;

use super::{CorpusError, Vocabulary};
use crate::textvec::read_text_vectors;

/// Word vectors indexed by vocabulary id, one row per id in
/// [`Vocabulary::id_space`]. The PAD and OOV rows, and the rows of words
/// missing from the source file, are all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    rows: usize,
    values: Vec<f64>,
}

impl EmbeddingTable {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        Self {
            dim,
            rows,
            values: vec![0.0; rows * dim],
        }
    }

    /// Rebuilds a table from row-major values, checking it covers `vocab`.
    pub fn from_values(vocab: &Vocabulary, dim: usize, values: Vec<f64>) -> Result<Self, CorpusError> {
        let rows = vocab.id_space();
        if values.len() != rows * dim {
            return Err(CorpusError::TableShape {
                expected: rows * dim,
                found: values.len(),
            });
        }
        Ok(Self { dim, rows, values })
    }

    /// Uniform(-scale, scale) vectors for every word, zero PAD/OOV rows.
    /// Stands in for pretrained vectors in tests and small experiments.
    pub fn random<R: Rng>(vocab: &Vocabulary, dim: usize, scale: f64, rng: &mut R) -> Self {
        let mut table = Self::zeros(vocab.id_space(), dim);
        for v in &mut table.values[..vocab.len() * dim] {
            *v = rng.gen_range(-scale..=scale);
        }
        table
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn row(&self, id: usize) -> &[f64] {
        &self.values[id * self.dim..(id + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

/// Loads pretrained vectors for the words of `vocab` from the text format.
///
/// File tokens outside the vocabulary are ignored; vocabulary words the file
/// does not cover keep a zero row. If a token appears twice, the first row
/// wins.
pub fn load_embeddings<R: BufRead>(reader: R, vocab: &Vocabulary) -> Result<EmbeddingTable, CorpusError> {
    let file = read_text_vectors(reader)?;
    let mut table = EmbeddingTable::zeros(vocab.id_space(), file.dim);
    let mut filled = vec![false; vocab.len()];
    for (token, values) in file.rows {
        if let Some(id) = vocab.get(&token) {
            if !filled[id] {
                filled[id] = true;
                table.values[id * file.dim..(id + 1) * file.dim].copy_from_slice(&values);
            }
        }
    }
    let hits = filled.iter().filter(|f| **f).count();
    log::debug!("loaded vectors for {hits}/{} vocabulary words", vocab.len());
    Ok(table)
}
