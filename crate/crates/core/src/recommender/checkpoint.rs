//! Binary checkpoint format.
//!
//! ```text
//! "DTRC"  u32 version
//! section*            name_len u32, name (UTF-8), then either
//!                       rows u32, cols u32, rows·cols f64      (tensor)
//!                     or, for names starting with "list.",
//!                       count u32, (len u32, UTF-8 bytes)*     (string list)
//! u64 checksum        FNV-1a over every preceding byte
//! ```
//!
//! All integers and floats are little-endian. Model tensors use the names
//! from [`ModelParams::named_tensors`]; the word and user tables and both
//! vocabularies travel with the model so a checkpoint is self-contained for
//! inference.

use std::collections::HashMap;
use std::path::Path;

use super::{AggregationMode, CheckpointError, ModelConfig, ModelParams, TrainReport, UserEmbeddings};
use crate::corpus::{EmbeddingTable, TagVocabulary, Vocabulary};

pub const MAGIC: &[u8; 4] = b"DTRC";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingMeta {
    pub seed: u64,
    pub max_len: usize,
    pub report: TrainReport,
}

/// A trained model with everything needed to run inference.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams,
    pub vocab: Vocabulary,
    pub tags: TagVocabulary,
    pub words: EmbeddingTable,
    pub users: UserEmbeddings,
    pub meta: TrainingMeta,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: usize) {
        let v = u32::try_from(v).expect("checkpoint field exceeds u32");
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn str(&mut self, s: &str) {
        self.u32(s.len());
        self.0.extend_from_slice(s.as_bytes());
    }

    fn tensor(&mut self, name: &str, (rows, cols): (usize, usize), values: &[f64]) {
        debug_assert_eq!(rows * cols, values.len());
        self.str(name);
        self.u32(rows);
        self.u32(cols);
        for v in values {
            self.0.extend_from_slice(&v.to_le_bytes());
        }
    }

    fn list<S: AsRef<str>>(&mut self, name: &str, items: &[S]) {
        debug_assert!(name.starts_with("list."));
        self.str(name);
        self.u32(items.len());
        for s in items {
            self.str(s.as_ref());
        }
    }
}

enum Section {
    Tensor {
        rows: usize,
        cols: usize,
        values: Vec<f64>,
    },
    List(Vec<String>),
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    context: String,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], CheckpointError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(CheckpointError::Truncated(self.context.clone())),
        }
    }

    fn u32(&mut self) -> Result<usize, CheckpointError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize)
    }

    fn str(&mut self) -> Result<String, CheckpointError> {
        let n = self.u32()?;
        let b = self.take(n)?;
        String::from_utf8(b.to_vec()).map_err(|_| CheckpointError::Section {
            section: self.context.clone(),
            message: "invalid UTF-8".into(),
        })
    }
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer(Vec::new());
        w.0.extend_from_slice(MAGIC);
        w.0.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());

        let cfg = self.params.config();
        let meta = [
            format!("mode={}", cfg.mode),
            format!("share_encoder={}", cfg.share_encoder),
            format!("input_dim={}", cfg.input_dim),
            format!("hidden_dim={}", cfg.hidden_dim),
            format!("user_dim={}", cfg.user_dim),
            format!("num_tags={}", cfg.num_tags),
            format!("dropout={}", self.params.dropout),
            format!("seed={}", self.meta.seed),
            format!("max_len={}", self.meta.max_len),
            format!("epochs_run={}", self.meta.report.epochs_run),
            format!("best_epoch={}", self.meta.report.best_epoch),
        ];
        w.list("list.meta", &meta);
        for (name, shape, values) in self.params.named_tensors() {
            w.tensor(&name, shape, values);
        }
        w.list("list.vocab.words", self.vocab.tokens());
        w.list("list.vocab.tags", self.tags.tags());
        w.list("list.users", self.users.ids());
        w.tensor(
            "embeddings.words",
            (self.words.rows(), self.words.dim()),
            self.words.values(),
        );
        w.tensor(
            "embeddings.users",
            (self.users.len(), self.users.dim()),
            self.users.values(),
        );
        let hist = &self.meta.report.loss_history;
        w.tensor("train.loss_history", (1, hist.len()), hist);
        let val = &self.meta.report.validation_history;
        w.tensor("train.validation_history", (1, val.len()), val);

        let sum = fnv1a(&w.0);
        w.0.extend_from_slice(&sum.to_le_bytes());
        w.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CheckpointError> {
        if bytes.len() < 4 || &bytes[..4] != MAGIC {
            return Err(CheckpointError::Magic);
        }
        let mut r = Reader {
            bytes,
            pos: 4,
            context: "version".into(),
        };
        let version = r.u32()? as u32;
        if version != CHECKPOINT_VERSION {
            return Err(CheckpointError::UnsupportedVersion(version));
        }

        let mut sections: HashMap<String, Section> = HashMap::new();
        while bytes.len() - r.pos > 8 {
            r.context = "section header".into();
            let name = r.str()?;
            r.context = name.clone();
            let section = if name.starts_with("list.") {
                let count = r.u32()?;
                let items = (0..count).map(|_| r.str()).collect::<Result<_, _>>()?;
                Section::List(items)
            } else {
                let rows = r.u32()?;
                let cols = r.u32()?;
                let n = rows.checked_mul(cols).and_then(|n| n.checked_mul(8));
                let raw = r.take(n.ok_or_else(|| CheckpointError::Truncated(name.clone()))?)?;
                let values = raw
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                    .collect();
                Section::Tensor { rows, cols, values }
            };
            sections.insert(name, section);
        }
        r.context = "checksum".into();
        let stored_pos = r.pos;
        let stored = u64::from_le_bytes(r.take(8)?.try_into().expect("8 bytes"));
        let computed = fnv1a(&bytes[..stored_pos]);
        if stored != computed {
            return Err(CheckpointError::Checksum { stored, computed });
        }
        assemble(sections)
    }
}

fn take_list(sections: &mut HashMap<String, Section>, name: &str) -> Result<Vec<String>, CheckpointError> {
    match sections.remove(name) {
        Some(Section::List(items)) => Ok(items),
        Some(Section::Tensor { .. }) => Err(bad(name, "expected a string list")),
        None => Err(CheckpointError::MissingSection(name.into())),
    }
}

fn take_tensor(
    sections: &mut HashMap<String, Section>,
    name: &str,
    shape: (usize, usize),
) -> Result<Vec<f64>, CheckpointError> {
    match sections.remove(name) {
        Some(Section::Tensor { rows, cols, values }) if (rows, cols) == shape => Ok(values),
        Some(Section::Tensor { rows, cols, .. }) => Err(bad(
            name,
            &format!("shape {rows}×{cols}, expected {}×{}", shape.0, shape.1),
        )),
        Some(Section::List(_)) => Err(bad(name, "expected a tensor")),
        None => Err(CheckpointError::MissingSection(name.into())),
    }
}

fn take_row(sections: &mut HashMap<String, Section>, name: &str) -> Result<Vec<f64>, CheckpointError> {
    match sections.remove(name) {
        Some(Section::Tensor { rows: 1, values, .. }) => Ok(values),
        Some(_) => Err(bad(name, "expected a 1×n tensor")),
        None => Err(CheckpointError::MissingSection(name.into())),
    }
}

fn bad(section: &str, message: &str) -> CheckpointError {
    CheckpointError::Section {
        section: section.into(),
        message: message.into(),
    }
}

fn assemble(mut sections: HashMap<String, Section>) -> Result<Checkpoint, CheckpointError> {
    let meta: HashMap<String, String> = take_list(&mut sections, "list.meta")?
        .into_iter()
        .filter_map(|kv| kv.split_once('=').map(|(k, v)| (k.to_owned(), v.to_owned())))
        .collect();
    fn field<T: std::str::FromStr>(meta: &HashMap<String, String>, key: &str) -> Result<T, CheckpointError> {
        meta.get(key)
            .ok_or_else(|| bad("list.meta", &format!("missing key {key}")))?
            .parse()
            .map_err(|_| bad("list.meta", &format!("bad value for {key}")))
    }
    let mode: AggregationMode = meta
        .get("mode")
        .ok_or_else(|| bad("list.meta", "missing key mode"))?
        .parse()
        .map_err(|e: String| bad("list.meta", &e))?;
    let config = ModelConfig {
        input_dim: field(&meta, "input_dim")?,
        hidden_dim: field(&meta, "hidden_dim")?,
        user_dim: field(&meta, "user_dim")?,
        num_tags: field(&meta, "num_tags")?,
        mode,
        share_encoder: field(&meta, "share_encoder")?,
    };
    let mut params = ModelParams::zeros(&config);
    params.dropout = field(&meta, "dropout")?;
    let shapes: Vec<(String, (usize, usize))> = params
        .named_tensors()
        .into_iter()
        .map(|(n, s, _)| (n, s))
        .collect();
    let mut flat = Vec::new();
    for (name, shape) in shapes {
        flat.extend(take_tensor(&mut sections, &name, shape)?);
    }
    params.set_flat(&flat)?;
    params.validate()?;

    let vocab = Vocabulary::from_tokens(take_list(&mut sections, "list.vocab.words")?)
        .map_err(|e| bad("list.vocab.words", &e.to_string()))?;
    let tags = TagVocabulary::from_tags(take_list(&mut sections, "list.vocab.tags")?)
        .map_err(|e| bad("list.vocab.tags", &e.to_string()))?;
    if tags.len() != config.num_tags {
        return Err(bad(
            "list.vocab.tags",
            "tag count differs from the model output size",
        ));
    }
    let words = take_tensor(
        &mut sections,
        "embeddings.words",
        (vocab.id_space(), config.input_dim),
    )?;
    let words = EmbeddingTable::from_values(&vocab, config.input_dim, words)
        .map_err(|e| bad("embeddings.words", &e.to_string()))?;
    let user_ids = take_list(&mut sections, "list.users")?;
    let user_values = take_tensor(
        &mut sections,
        "embeddings.users",
        (user_ids.len(), config.user_dim),
    )?;
    let users = UserEmbeddings::from_rows(config.user_dim, user_ids, user_values);

    let report = TrainReport {
        loss_history: take_row(&mut sections, "train.loss_history")?,
        validation_history: take_row(&mut sections, "train.validation_history")?,
        epochs_run: field(&meta, "epochs_run")?,
        best_epoch: field(&meta, "best_epoch")?,
    };
    if let Some(extra) = sections.keys().min() {
        log::warn!("ignoring unknown checkpoint section {extra}");
    }
    Ok(Checkpoint {
        params,
        vocab,
        tags,
        words,
        users,
        meta: TrainingMeta {
            seed: field(&meta, "seed")?,
            max_len: field(&meta, "max_len")?,
            report,
        },
    })
}

pub fn save_checkpoint(checkpoint: &Checkpoint, path: impl AsRef<Path>) -> Result<(), CheckpointError> {
    std::fs::write(path, checkpoint.to_bytes())?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint, CheckpointError> {
    Checkpoint::from_bytes(&std::fs::read(path)?)
}
