//! Run configuration: defaults, then a flat dotted-key JSON file, then the
//! `DEEPTAGREC_SEED` environment variable, then command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use deeptagrec::neural::Optimizer;
use deeptagrec::recommender::GradCheckSetup;
use deeptagrec::{AggregationMode, TrainConfig, WalkConfig};

pub const SEED_ENV: &str = "DEEPTAGREC_SEED";

/// Path-valued keys; they share their names with the flags.
pub const PATH_KEYS: [&str; 10] = [
    "data",
    "out",
    "graph",
    "word-emb",
    "user-emb",
    "validation",
    "checkpoint",
    "test",
    "report",
    "question",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub min_count: usize,
    pub walk: WalkConfig,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub user_dim: usize,
    pub share_encoder: bool,
    pub agg: AggregationMode,
    pub train: TrainConfig,
    pub ks: Vec<usize>,
    pub exact_ks: Option<Vec<usize>>,
    pub k: usize,
    pub user: Option<String>,
    pub content_only: bool,
    pub gradcheck: GradCheckSetup,
    pub tol: f64,
    pub paths: BTreeMap<String, PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            min_count: 1,
            walk: WalkConfig::default(),
            embed_dim: 128,
            hidden_dim: 1000,
            user_dim: 128,
            share_encoder: false,
            agg: AggregationMode::Concatenation,
            train: TrainConfig::default(),
            ks: vec![3, 5, 10],
            exact_ks: None,
            k: 5,
            user: None,
            content_only: false,
            gradcheck: GradCheckSetup::default(),
            tol: 1e-4,
            paths: BTreeMap::new(),
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .trim()
        .parse()
        .map_err(|_| format!("invalid value {value:?} for {key}"))
}

fn flag(key: &str, value: &str) -> Result<bool, String> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(format!(
            "invalid value {value:?} for {key} (expected true or false)"
        )),
    }
}

fn list(key: &str, value: &str) -> Result<Vec<usize>, String> {
    let ks: Vec<usize> = value.split(',').map(|s| num(key, s)).collect::<Result<_, _>>()?;
    if ks.is_empty() || ks.contains(&0) {
        return Err(format!("{key} needs positive integers, got {value:?}"));
    }
    Ok(ks)
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "seed" => self.seed = num(key, value)?,
            "corpus.min_count" => self.min_count = num(key, value)?,
            "corpus.max_len" => self.train.max_len = num(key, value)?,
            "walk.p" => self.walk.p = num(key, value)?,
            "walk.q" => self.walk.q = num(key, value)?,
            "walk.length" => self.walk.walk_length = num(key, value)?,
            "walk.per_node" => self.walk.walks_per_node = num(key, value)?,
            "walk.window" => self.walk.window = num(key, value)?,
            "walk.negatives" => self.walk.negatives = num(key, value)?,
            "walk.epochs" => self.walk.epochs = num(key, value)?,
            "walk.lr" => self.walk.learning_rate = num(key, value)?,
            "walk.weighted" => self.walk.weighted = flag(key, value)?,
            "embed.dim" => self.embed_dim = num(key, value)?,
            "model.hidden_dim" => self.hidden_dim = num(key, value)?,
            "model.user_dim" => self.user_dim = num(key, value)?,
            "model.share_encoder" => self.share_encoder = flag(key, value)?,
            "model.agg" => self.agg = value.parse()?,
            "train.lr" => self.train.lr = num(key, value)?,
            "train.dropout" => self.train.dropout = num(key, value)?,
            "train.batch_size" => self.train.batch_size = num(key, value)?,
            "train.epochs" => self.train.epochs = num(key, value)?,
            "train.patience" => self.train.patience = num(key, value)?,
            "train.optimizer" => {
                self.train.optimizer = match value {
                    "adam" => Optimizer::adam(),
                    "sgd" => Optimizer::Sgd,
                    _ => return Err(format!("unknown optimizer {value:?} (expected adam or sgd)")),
                }
            }
            "eval.ks" => self.ks = list(key, value)?,
            "eval.exact_ks" => self.exact_ks = Some(list(key, value)?),
            "recommend.k" => self.k = num(key, value)?,
            "recommend.user" => self.user = Some(value.to_owned()),
            "recommend.content_only" => self.content_only = flag(key, value)?,
            "gradcheck.dims" => {
                let dims = list(key, value)?;
                let [m, d] = dims[..] else {
                    return Err(format!("{key} expects m,d, got {value:?}"));
                };
                self.gradcheck.input_dim = m;
                self.gradcheck.hidden_dim = d;
            }
            "gradcheck.seq_len" => self.gradcheck.seq_len = num(key, value)?,
            "gradcheck.tags" => self.gradcheck.num_tags = num(key, value)?,
            "gradcheck.eps" => self.gradcheck.eps = num(key, value)?,
            "gradcheck.tol" => self.tol = num(key, value)?,
            path if PATH_KEYS.contains(&path) => {
                self.paths.insert(path.to_owned(), PathBuf::from(value));
            }
            _ => return Err(format!("unknown configuration key {key:?}")),
        }
        Ok(())
    }

    /// Applies a JSON object of dotted keys. Numbers and booleans are taken
    /// verbatim; arrays of integers become comma lists.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| format!("config {} is not valid JSON: {e}", path.display()))?;
        let serde_json::Value::Object(map) = value else {
            return Err(format!("config {} must be a JSON object", path.display()));
        };
        for (key, v) in map {
            let text = match v {
                serde_json::Value::String(s) => s,
                serde_json::Value::Array(items) => {
                    items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
                }
                other => other.to_string(),
            };
            self.set(&key, &text)?;
        }
        Ok(())
    }

    /// Copies the run seed into the per-stage configs.
    pub fn finish(&mut self) -> Result<(), String> {
        self.walk.seed = self.seed;
        self.train.seed = self.seed;
        self.gradcheck.seed = self.seed;
        self.gradcheck.mode = self.agg;
        self.gradcheck.share_encoder = self.share_encoder;
        self.walk.validate().map_err(|e| e.to_string())?;
        self.train.validate().map_err(|e| e.to_string())?;
        if self.embed_dim == 0 || self.hidden_dim == 0 {
            return Err("embed.dim and model.hidden_dim must be at least 1".into());
        }
        if self.k == 0 {
            return Err("recommend.k must be at least 1".into());
        }
        if self.gradcheck.eps.is_nan() || self.gradcheck.eps <= 0.0 || self.tol.is_nan() || self.tol <= 0.0 {
            return Err("gradcheck.eps and gradcheck.tol must be positive".into());
        }
        Ok(())
    }

    pub fn path(&self, key: &str) -> Result<&Path, String> {
        self.paths
            .get(key)
            .map(PathBuf::as_path)
            .ok_or_else(|| format!("missing required --{key}"))
    }

    pub fn input(&self, key: &str) -> Result<&Path, String> {
        let p = self.path(key)?;
        if p.exists() {
            Ok(p)
        } else {
            Err(format!("--{key} {} does not exist", p.display()))
        }
    }

    pub fn optional_input(&self, key: &str) -> Result<Option<&Path>, String> {
        match self.paths.contains_key(key) {
            true => self.input(key).map(Some),
            false => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_keys() {
        let mut c = RunConfig::default();
        c.set("train.lr", "0.01").unwrap();
        c.set("walk.p", "0.5").unwrap();
        c.set("model.agg", "add").unwrap();
        c.set("eval.ks", "1,2").unwrap();
        c.set("gradcheck.dims", "3,4").unwrap();
        assert_eq!(c.train.lr, 0.01);
        assert_eq!(c.walk.p, 0.5);
        assert_eq!(c.agg, AggregationMode::Addition);
        assert_eq!(c.ks, vec![1, 2]);
        assert_eq!((c.gradcheck.input_dim, c.gradcheck.hidden_dim), (3, 4));
        assert!(c.set("train.lr", "fast").is_err());
        assert!(c.set("nope", "1").is_err());
        assert!(c.set("eval.ks", "3,0").is_err());
        assert!(c.set("gradcheck.dims", "3").is_err());
    }

    #[test]
    fn file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(
            &path,
            r#"{"train.epochs": 3, "walk.weighted": true, "eval.ks": [1, 4], "data": "x.jsonl"}"#,
        )
        .unwrap();
        let mut c = RunConfig::default();
        c.apply_file(&path).unwrap();
        assert_eq!(c.train.epochs, 3);
        assert!(c.walk.weighted);
        assert_eq!(c.ks, vec![1, 4]);
        assert_eq!(c.path("data").unwrap(), Path::new("x.jsonl"));
    }

    #[test]
    fn finish_propagates_seed() {
        let mut c = RunConfig::default();
        c.set("seed", "7").unwrap();
        c.finish().unwrap();
        assert_eq!((c.walk.seed, c.train.seed, c.gradcheck.seed), (7, 7, 7));
        c.set("train.dropout", "1.5").unwrap();
        assert!(c.finish().is_err());
    }
}
