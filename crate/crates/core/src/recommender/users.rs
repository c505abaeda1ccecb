use std::collections::{HashMap, HashSet};
use std::io::BufRead;

use super::ModelError;
use crate::graphembed::{GraphError, NodeEmbeddings, NodeKind};

/// Frozen user vectors, with the all-zero vector for unknown users.
#[derive(Debug, Clone, PartialEq)]
pub struct UserEmbeddings {
    dim: usize,
    ids: Vec<String>,
    index: HashMap<String, usize>,
    values: Vec<f64>,
}

impl UserEmbeddings {
    /// No known users: every lookup is the cold-start vector.
    pub fn empty(dim: usize) -> Self {
        Self::from_rows(dim, Vec::new(), Vec::new())
    }

    pub(crate) fn from_rows(dim: usize, ids: Vec<String>, values: Vec<f64>) -> Self {
        debug_assert_eq!(ids.len() * dim, values.len());
        let index = ids.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        Self {
            dim,
            ids,
            index,
            values,
        }
    }

    /// Builds a table from `(user id, vector)` pairs; every vector must have
    /// length `dim` and ids must be distinct.
    pub fn from_vectors<I>(dim: usize, vectors: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        let mut ids = Vec::new();
        let mut seen = HashSet::new();
        let mut values = Vec::new();
        for (id, v) in vectors {
            if v.len() != dim {
                return Err(ModelError::UserDim {
                    expected: dim,
                    found: v.len(),
                });
            }
            if !seen.insert(id.clone()) {
                return Err(ModelError::Config(format!("duplicate user id {id:?}")));
            }
            ids.push(id);
            values.extend(v);
        }
        Ok(Self::from_rows(dim, ids, values))
    }

    /// Keeps the `u:`-prefixed rows of a node embedding table.
    pub fn from_node_embeddings(nodes: &NodeEmbeddings) -> Self {
        let mut ids = Vec::new();
        let mut values = Vec::new();
        for (i, key) in nodes.keys().iter().enumerate() {
            if let Some(id) = key.strip_prefix(NodeKind::User.prefix()) {
                ids.push(id.to_owned());
                values.extend_from_slice(nodes.row(i));
            }
        }
        Self::from_rows(nodes.dim(), ids, values)
    }

    /// Reads an exported node embedding file and keeps the user rows.
    pub fn read_text<R: BufRead>(reader: R) -> Result<Self, GraphError> {
        Ok(Self::from_node_embeddings(&NodeEmbeddings::read_text(reader)?))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn contains(&self, user_id: &str) -> bool {
        self.index.contains_key(user_id)
    }

    pub fn vector(&self, user_id: &str) -> Vec<f64> {
        match self.index.get(user_id) {
            Some(&i) => self.values[i * self.dim..(i + 1) * self.dim].to_vec(),
            None => vec![0.0; self.dim],
        }
    }
}
