use std::collections::{BTreeSet, HashSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::CorpusError;

/// One question as it appears in the dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub id: String,
    pub title: String,
    pub body: String,
    pub tags: BTreeSet<String>,
    pub user_id: String,
}

/// Reads JSON-lines question records, one flat object per line.
///
/// Blank lines are skipped. The first malformed line aborts parsing and is
/// reported with its 1-based line number.
pub fn parse_dataset<R: BufRead>(reader: R) -> Result<Vec<QuestionRecord>, CorpusError> {
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: QuestionRecord = serde_json::from_str(&line).map_err(|e| CorpusError::Record {
            line: line_no,
            message: e.to_string(),
        })?;
        if record.tags.is_empty() {
            return Err(CorpusError::Record {
                line: line_no,
                message: "record has an empty tag set".into(),
            });
        }
        if !seen.insert(record.id.clone()) {
            return Err(CorpusError::DuplicateId {
                line: line_no,
                id: record.id,
            });
        }
        records.push(record);
    }
    Ok(records)
}
