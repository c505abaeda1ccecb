use std::collections::BTreeSet;

use super::{tokenize, QuestionRecord, TagVocabulary, Vocabulary};

pub const DEFAULT_MAX_LEN: usize = 300;

/// A question as a fixed-length id sequence plus its multi-hot target.
///
/// `tokens` holds the title ids, then the body ids, then trailing PAD ids;
/// its length is always the `max_len` used at encoding time. `title_len`
/// marks where the title ends, so the title encoder consumes
/// `tokens[..title_len]` and the body encoder the rest (including padding).
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedQuestion {
    pub id: String,
    pub tokens: Vec<usize>,
    pub title_len: usize,
    pub target: Vec<f64>,
    pub user_id: String,
    /// Tags of the record that were not in the tag vocabulary.
    pub dropped_tags: usize,
}

impl EncodedQuestion {
    pub fn title_ids(&self) -> &[usize] {
        &self.tokens[..self.title_len]
    }

    pub fn body_ids(&self) -> &[usize] {
        &self.tokens[self.title_len..]
    }

    /// Indices of the tags set in the target.
    pub fn tag_indices(&self) -> BTreeSet<usize> {
        self.target
            .iter()
            .enumerate()
            .filter(|(_, t)| **t == 1.0)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Multi-hot vector over `tag_vocab`. Returns the vector and the number of
/// tags that were skipped because the vocabulary does not know them.
pub fn make_target(tags: &BTreeSet<String>, tag_vocab: &TagVocabulary) -> (Vec<f64>, usize) {
    let mut target = vec![0.0; tag_vocab.len()];
    let mut dropped = 0;
    for tag in tags {
        match tag_vocab.get(tag) {
            Some(i) => target[i] = 1.0,
            None => dropped += 1,
        }
    }
    (target, dropped)
}

/// Encodes title then body into exactly `max_len` ids.
///
/// Longer questions keep their prefix (so the title survives first); shorter
/// ones are right-padded with the PAD id. Unknown words map to the OOV id.
///
/// # Panics
///
/// If `max_len` is zero.
pub fn encode_question(
    record: &QuestionRecord,
    vocab: &Vocabulary,
    tag_vocab: &TagVocabulary,
    max_len: usize,
) -> EncodedQuestion {
    assert!(max_len >= 1, "max_len must be at least 1");
    let mut tokens: Vec<usize> = tokenize(&record.title)
        .iter()
        .map(|t| vocab.id_or_oov(t))
        .collect();
    let title_len = tokens.len().min(max_len);
    tokens.extend(tokenize(&record.body).iter().map(|t| vocab.id_or_oov(t)));
    tokens.truncate(max_len);
    tokens.resize(max_len, vocab.pad_id());

    let (target, dropped_tags) = make_target(&record.tags, tag_vocab);
    if dropped_tags > 0 {
        log::warn!(
            "question {}: {dropped_tags} tag(s) not in the tag vocabulary",
            record.id
        );
    }
    EncodedQuestion {
        id: record.id.clone(),
        tokens,
        title_len,
        target,
        user_id: record.user_id.clone(),
        dropped_tags,
    }
}
