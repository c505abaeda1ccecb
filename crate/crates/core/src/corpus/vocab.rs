use std::collections::HashMap;

use super::{tokenize, CorpusError, QuestionRecord};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
struct Indexer {
    index: HashMap<String, usize>,
    tokens: Vec<String>,
}

impl Indexer {
    fn from_tokens(tokens: Vec<String>) -> Result<Self, CorpusError> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(CorpusError::DuplicateToken(t.clone()));
            }
        }
        Ok(Self { index, tokens })
    }

    /// Tokens with count ≥ min_count, by descending count then lexicographically.
    fn from_counts(counts: HashMap<String, usize>, min_count: usize) -> Self {
        let mut kept: Vec<(String, usize)> = counts.into_iter().filter(|(_, c)| *c >= min_count).collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let tokens = kept.into_iter().map(|(t, _)| t).collect();
        Self::from_tokens(tokens).expect("counted tokens are distinct")
    }
}

/// Word vocabulary.
///
/// Words occupy indices `0..len()`. Two reserved ids follow them:
/// [`pad_id`](Self::pad_id) and [`oov_id`](Self::oov_id). Both always map to
/// an all-zero embedding row, so [`id_space`](Self::id_space) is `len() + 2`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary(Indexer);

impl Vocabulary {
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self, CorpusError> {
        Indexer::from_tokens(tokens).map(Self)
    }

    pub fn len(&self) -> usize {
        self.0.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.0.index.get(token).copied()
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        self.0.tokens.get(index).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.0.tokens
    }

    pub fn pad_id(&self) -> usize {
        self.len()
    }

    pub fn oov_id(&self) -> usize {
        self.len() + 1
    }

    /// Number of distinct ids including PAD and OOV.
    pub fn id_space(&self) -> usize {
        self.len() + 2
    }

    /// Id of `token`, falling back to the OOV id.
    pub fn id_or_oov(&self, token: &str) -> usize {
        self.get(token).unwrap_or_else(|| self.oov_id())
    }
}

/// Tag vocabulary; indices are positions in the model's output layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagVocabulary(Indexer);

impl TagVocabulary {
    pub fn from_tags(tags: Vec<String>) -> Result<Self, CorpusError> {
        if tags.is_empty() {
            return Err(CorpusError::EmptyTagVocabulary);
        }
        Indexer::from_tokens(tags).map(Self)
    }

    pub fn len(&self) -> usize {
        self.0.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.tokens.is_empty()
    }

    pub fn get(&self, tag: &str) -> Option<usize> {
        self.0.index.get(tag).copied()
    }

    pub fn tag(&self, index: usize) -> Option<&str> {
        self.0.tokens.get(index).map(String::as_str)
    }

    pub fn tags(&self) -> &[String] {
        &self.0.tokens
    }
}

/// Builds the word vocabulary (title and body tokens occurring at least
/// `min_count` times) and the tag vocabulary (every tag seen).
///
/// Both are ordered by descending frequency, ties broken lexicographically.
pub fn build_vocab(
    records: &[QuestionRecord],
    min_count: usize,
) -> Result<(Vocabulary, TagVocabulary), CorpusError> {
    if min_count == 0 {
        return Err(CorpusError::MinCount(min_count));
    }
    if records.is_empty() {
        return Err(CorpusError::EmptyRecords);
    }
    let mut words: HashMap<String, usize> = HashMap::new();
    let mut tags: HashMap<String, usize> = HashMap::new();
    for r in records {
        for t in tokenize(&r.title).into_iter().chain(tokenize(&r.body)) {
            *words.entry(t).or_default() += 1;
        }
        for tag in &r.tags {
            *tags.entry(tag.clone()).or_default() += 1;
        }
    }
    let vocab = Vocabulary(Indexer::from_counts(words, min_count));
    let tag_vocab = TagVocabulary(Indexer::from_counts(tags, 1));
    if tag_vocab.is_empty() {
        return Err(CorpusError::EmptyTagVocabulary);
    }
    Ok((vocab, tag_vocab))
}
