//! Ranking metrics over a test set.
//!
//! Every metric takes the top `k` of each instance's ranking. Precision
//! divides the hits by `k`, recall by the size of the truth set. Top-k
//! accuracy counts instances with at least one hit. Exact-k accuracy counts
//! instances whose `k`-th tag (1-based) is correct.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::corpus::{EmbeddingTable, EncodedQuestion};
use crate::recommender::{rank_tags, ModelError, ModelParams, UserEmbeddings};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no instances to evaluate")]
    Empty,
    #[error("k must be at least 1")]
    ZeroK,
    #[error("instance {index} ranks {len} tags, fewer than k = {k}")]
    ShortRanking { index: usize, len: usize, k: usize },
    #[error("instance {index} has an empty truth set")]
    EmptyTruth { index: usize },
    #[error("instance {index} ranks tag {tag} more than once")]
    DuplicateRanking { index: usize, tag: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Ground-truth tag set and recommended ranking for one question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalInstance {
    pub truth: BTreeSet<usize>,
    pub ranking: Vec<usize>,
}

impl EvalInstance {
    pub fn new(truth: BTreeSet<usize>, ranking: Vec<usize>) -> Self {
        Self { truth, ranking }
    }

    fn hits(&self, k: usize) -> usize {
        self.ranking[..k]
            .iter()
            .filter(|t| self.truth.contains(t))
            .count()
    }
}

fn check(instances: &[EvalInstance], k: usize) -> Result<(), EvalError> {
    if instances.is_empty() {
        return Err(EvalError::Empty);
    }
    if k == 0 {
        return Err(EvalError::ZeroK);
    }
    for (index, inst) in instances.iter().enumerate() {
        if inst.truth.is_empty() {
            return Err(EvalError::EmptyTruth { index });
        }
        if inst.ranking.len() < k {
            return Err(EvalError::ShortRanking {
                index,
                len: inst.ranking.len(),
                k,
            });
        }
        let mut seen = HashSet::with_capacity(inst.ranking.len());
        if let Some(&tag) = inst.ranking.iter().find(|t| !seen.insert(**t)) {
            return Err(EvalError::DuplicateRanking { index, tag });
        }
    }
    Ok(())
}

fn mean(instances: &[EvalInstance], k: usize, f: impl Fn(&EvalInstance) -> f64) -> Result<f64, EvalError> {
    check(instances, k)?;
    Ok(instances.iter().map(f).sum::<f64>() / instances.len() as f64)
}

pub fn precision_at_k(instances: &[EvalInstance], k: usize) -> Result<f64, EvalError> {
    mean(instances, k, |i| i.hits(k) as f64 / k as f64)
}

pub fn recall_at_k(instances: &[EvalInstance], k: usize) -> Result<f64, EvalError> {
    mean(instances, k, |i| i.hits(k) as f64 / i.truth.len() as f64)
}

pub fn topk_accuracy(instances: &[EvalInstance], k: usize) -> Result<f64, EvalError> {
    mean(instances, k, |i| if i.hits(k) > 0 { 1.0 } else { 0.0 })
}

pub fn exactk_accuracy(instances: &[EvalInstance], k: usize) -> Result<f64, EvalError> {
    mean(instances, k, |i| {
        if i.truth.contains(&i.ranking[k - 1]) {
            1.0
        } else {
            0.0
        }
    })
}

/// Per-k metric values plus the number of evaluated questions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsReport {
    pub q: usize,
    pub precision: BTreeMap<usize, f64>,
    pub recall: BTreeMap<usize, f64>,
    pub topk: BTreeMap<usize, f64>,
    pub exactk: BTreeMap<usize, f64>,
}

struct KeyedByK<'a>(&'a BTreeMap<usize, f64>);

impl Serialize for KeyedByK<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            map.serialize_entry(&k.to_string(), v)?;
        }
        map.end()
    }
}

impl Serialize for MetricsReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(5))?;
        map.serialize_entry("q", &self.q)?;
        map.serialize_entry("precision", &KeyedByK(&self.precision))?;
        map.serialize_entry("recall", &KeyedByK(&self.recall))?;
        map.serialize_entry("topk", &KeyedByK(&self.topk))?;
        map.serialize_entry("exactk", &KeyedByK(&self.exactk))?;
        map.end()
    }
}

impl MetricsReport {
    /// Computes all four metrics at every `k` in `ks`, and exact-k at every
    /// `k` in `exact_ks`.
    pub fn compute(instances: &[EvalInstance], ks: &[usize], exact_ks: &[usize]) -> Result<Self, EvalError> {
        check(instances, 1)?;
        let mut report = MetricsReport {
            q: instances.len(),
            ..Default::default()
        };
        for &k in ks {
            report.precision.insert(k, precision_at_k(instances, k)?);
            report.recall.insert(k, recall_at_k(instances, k)?);
            report.topk.insert(k, topk_accuracy(instances, k)?);
        }
        for &k in exact_ks {
            report.exactk.insert(k, exactk_accuracy(instances, k)?);
        }
        Ok(report)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Ranks tags for every test question and builds its instance. Questions
/// whose tags all fell outside the tag vocabulary are skipped with a warning.
pub fn rank_test_set(
    model: &ModelParams,
    test: &[EncodedQuestion],
    emb: &EmbeddingTable,
    users: &UserEmbeddings,
    depth: usize,
) -> Result<Vec<EvalInstance>, EvalError> {
    let mut out = Vec::with_capacity(test.len());
    for q in test {
        let truth = q.tag_indices();
        if truth.is_empty() {
            log::warn!("question {} has no known tags; skipped", q.id);
            continue;
        }
        let probs = model.predict(q, &users.vector(&q.user_id), emb)?;
        out.push(EvalInstance::new(truth, rank_tags(&probs, depth)?));
    }
    Ok(out)
}

/// Predicts, ranks and scores a test set at each `k` in `ks`; exact-k uses
/// the same list.
pub fn evaluate(
    model: &ModelParams,
    test: &[EncodedQuestion],
    emb: &EmbeddingTable,
    users: &UserEmbeddings,
    ks: &[usize],
) -> Result<MetricsReport, EvalError> {
    if test.is_empty() {
        return Err(EvalError::Empty);
    }
    let depth = ks.iter().copied().max().ok_or(EvalError::ZeroK)?;
    let instances = rank_test_set(model, test, emb, users, depth)?;
    MetricsReport::compute(&instances, ks, ks)
}
