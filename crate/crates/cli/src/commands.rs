use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use deeptagrec::corpus::{build_vocab, encode_question, load_embeddings, parse_dataset, EncodedQuestion};
use deeptagrec::evalkit::{rank_test_set, MetricsReport};
use deeptagrec::graphembed::embed_graph;
use deeptagrec::recommender::{
    load_checkpoint, random_grad_check, rank_tags, train_with_validation, TrainingMeta,
};
use deeptagrec::{
    Checkpoint, ModelConfig, ModelParams, QuestionRecord, TagVocabulary, UserEmbeddings, UserTagGraph,
    Vocabulary,
};
use log::info;
use serde::Deserialize;

use crate::config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, configuration or inputs; exit status 2.
    Usage(String),
    /// A pipeline stage failed; exit status 1.
    Runtime {
        stage: &'static str,
        source: anyhow::Error,
    },
}

impl From<String> for CliError {
    fn from(msg: String) -> Self {
        CliError::Usage(msg)
    }
}

trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError>;
}

impl<T, E: Into<anyhow::Error>> Stage<T> for Result<T, E> {
    fn stage(self, stage: &'static str) -> Result<T, CliError> {
        self.map_err(|e| CliError::Runtime {
            stage,
            source: e.into(),
        })
    }
}

pub fn run(name: &str, config: &RunConfig) -> Result<(), CliError> {
    match name {
        "ingest" => ingest(config),
        "build-graph" => build_graph(config),
        "embed-users" => embed_users(config),
        "train" => train(config),
        "evaluate" => evaluate(config),
        "recommend" => recommend(config),
        "gradcheck" => gradcheck(config),
        other => Err(CliError::Usage(format!("unknown command {other}"))),
    }
}

/// Writes through a sibling temporary file so a failed run never leaves a
/// partial artifact behind.
fn write_atomic(
    path: &Path,
    fill: impl FnOnce(&mut BufWriter<File>) -> anyhow::Result<()>,
) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    let result = (|| {
        let mut w =
            BufWriter::new(File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?);
        fill(&mut w)?;
        w.flush()?;
        Ok(())
    })();
    match result {
        Ok(()) => std::fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display())),
        Err(e) => {
            let _ = std::fs::remove_file(&tmp);
            Err(e)
        }
    }
}

fn read_records(path: &Path) -> anyhow::Result<Vec<QuestionRecord>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    parse_dataset(BufReader::new(file)).with_context(|| format!("parsing {}", path.display()))
}

fn encode_all(
    records: &[QuestionRecord],
    vocab: &Vocabulary,
    tags: &TagVocabulary,
    max_len: usize,
) -> Vec<EncodedQuestion> {
    records
        .iter()
        .map(|r| encode_question(r, vocab, tags, max_len))
        .collect()
}

fn ingest(config: &RunConfig) -> Result<(), CliError> {
    let data = config.input("data")?;
    let out = config.path("out")?;
    let records = read_records(data).stage("ingest")?;
    let (vocab, tags) = build_vocab(&records, config.min_count).stage("ingest")?;
    let encoded = encode_all(&records, &vocab, &tags, config.train.max_len);
    std::fs::create_dir_all(out)
        .with_context(|| format!("creating {}", out.display()))
        .stage("ingest")?;
    write_atomic(&out.join("vocab.txt"), |w| {
        for t in vocab.tokens() {
            writeln!(w, "{t}")?;
        }
        Ok(())
    })
    .stage("ingest")?;
    write_atomic(&out.join("tags.txt"), |w| {
        for t in tags.tags() {
            writeln!(w, "{t}")?;
        }
        Ok(())
    })
    .stage("ingest")?;
    write_atomic(&out.join("encoded.jsonl"), |w| {
        for q in &encoded {
            let line = serde_json::json!({
                "id": q.id,
                "user_id": q.user_id,
                "title_len": q.title_len,
                "tokens": q.tokens,
                "tags": q.tag_indices(),
            });
            writeln!(w, "{line}")?;
        }
        Ok(())
    })
    .stage("ingest")?;
    let dropped: usize = encoded.iter().map(|q| q.dropped_tags).sum();
    info!(
        "ingest: {} questions, {} words, {} tags, {dropped} dropped tags -> {}",
        records.len(),
        vocab.len(),
        tags.len(),
        out.display()
    );
    Ok(())
}

fn build_graph(config: &RunConfig) -> Result<(), CliError> {
    let data = config.input("data")?;
    let out = config.path("out")?;
    let records = read_records(data).stage("build-graph")?;
    let graph = UserTagGraph::build(&records);
    write_atomic(out, |w| Ok(graph.write_edge_list(w)?)).stage("build-graph")?;
    info!(
        "build-graph: {} users, {} tags, {} edges -> {}",
        graph.user_count(),
        graph.tag_count(),
        graph.edge_count(),
        out.display()
    );
    Ok(())
}

fn embed_users(config: &RunConfig) -> Result<(), CliError> {
    let graph_path = config.input("graph")?;
    let out = config.path("out")?;
    let file = File::open(graph_path)
        .with_context(|| format!("opening {}", graph_path.display()))
        .stage("embed-users")?;
    let graph = UserTagGraph::read_edge_list(BufReader::new(file)).stage("embed-users")?;
    let emb = embed_graph(&graph, config.embed_dim, &config.walk).stage("embed-users")?;
    write_atomic(out, |w| Ok(emb.write_text(w)?)).stage("embed-users")?;
    info!(
        "embed-users: {} nodes, dim {}, seed {} -> {}",
        emb.len(),
        emb.dim(),
        config.seed,
        out.display()
    );
    Ok(())
}

fn train(config: &RunConfig) -> Result<(), CliError> {
    let data = config.input("data")?;
    let word_path = config.input("word-emb")?;
    let user_path = config.optional_input("user-emb")?;
    let validation_path = config.optional_input("validation")?;
    let out = config.path("out")?;

    let records = read_records(data).stage("ingest")?;
    let (vocab, tags) = build_vocab(&records, config.min_count).stage("ingest")?;
    let file = File::open(word_path)
        .with_context(|| format!("opening {}", word_path.display()))
        .stage("load word embeddings")?;
    let words = load_embeddings(BufReader::new(file), &vocab).stage("load word embeddings")?;
    let users = match user_path {
        Some(p) => {
            let file = File::open(p)
                .with_context(|| format!("opening {}", p.display()))
                .stage("load user embeddings")?;
            UserEmbeddings::read_text(BufReader::new(file)).stage("load user embeddings")?
        }
        None => UserEmbeddings::empty(config.user_dim),
    };
    let max_len = config.train.max_len;
    let train_set = encode_all(&records, &vocab, &tags, max_len);
    let validation = match validation_path {
        Some(p) => encode_all(&read_records(p).stage("ingest")?, &vocab, &tags, max_len),
        None => Vec::new(),
    };

    let model_config = ModelConfig {
        input_dim: words.dim(),
        hidden_dim: config.hidden_dim,
        user_dim: users.dim(),
        num_tags: tags.len(),
        mode: config.agg,
        share_encoder: config.share_encoder,
    };
    let mut params = ModelParams::init(&model_config, config.seed);
    let report = train_with_validation(
        &mut params,
        &train_set,
        &validation,
        &words,
        &users,
        &config.train,
    )
    .stage("train")?;
    let final_loss = report.loss_history.last().copied().unwrap_or(f64::NAN);
    let (epochs, best) = (report.epochs_run, report.best_epoch);
    let checkpoint = Checkpoint {
        params,
        vocab,
        tags,
        words,
        users,
        meta: TrainingMeta {
            seed: config.seed,
            max_len,
            report,
        },
    };
    let bytes = checkpoint.to_bytes();
    write_atomic(out, |w| Ok(w.write_all(&bytes)?)).stage("save checkpoint")?;
    info!(
        "train: {} questions, {} tags, {} mode, {epochs} epochs (best {best}), final loss {final_loss:.6} -> {}",
        train_set.len(),
        checkpoint.tags.len(),
        config.agg,
        out.display()
    );
    Ok(())
}

fn evaluate(config: &RunConfig) -> Result<(), CliError> {
    let ck_path = config.input("checkpoint")?;
    let test_path = config.input("test")?;
    let out = config.path("report")?;
    let ck = load_checkpoint(ck_path).stage("load checkpoint")?;
    let exact_ks = config.exact_ks.clone().unwrap_or_else(|| config.ks.clone());
    let depth = config.ks.iter().chain(&exact_ks).copied().max().unwrap_or(1);
    if depth > ck.tags.len() {
        return Err(CliError::Usage(format!(
            "k = {depth} exceeds the {} tags of the checkpoint",
            ck.tags.len()
        )));
    }
    let records = read_records(test_path).stage("ingest")?;
    let test = encode_all(&records, &ck.vocab, &ck.tags, ck.meta.max_len);
    let instances = rank_test_set(&ck.params, &test, &ck.words, &ck.users, depth).stage("evaluate")?;
    let report = MetricsReport::compute(&instances, &config.ks, &exact_ks).stage("evaluate")?;
    let json = report.to_json();
    write_atomic(out, |w| Ok(writeln!(w, "{json}")?)).stage("write report")?;
    let summary: Vec<String> = config
        .ks
        .iter()
        .map(|k| format!("P@{k} {:.4} R@{k} {:.4}", report.precision[k], report.recall[k]))
        .collect();
    info!(
        "evaluate: {} questions, {} -> {}",
        report.q,
        summary.join(", "),
        out.display()
    );
    Ok(())
}

#[derive(Debug, Deserialize)]
struct QuestionInput {
    #[serde(default = "default_id")]
    id: String,
    title: String,
    #[serde(default)]
    body: String,
    #[serde(default)]
    user_id: Option<String>,
}

fn default_id() -> String {
    "question".into()
}

fn recommend(config: &RunConfig) -> Result<(), CliError> {
    let ck_path = config.input("checkpoint")?;
    let q_path = config.input("question")?;
    let text = std::fs::read_to_string(q_path)
        .with_context(|| format!("reading {}", q_path.display()))
        .stage("read question")?;
    let input: QuestionInput = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", q_path.display()))
        .stage("read question")?;
    let ck = load_checkpoint(ck_path).stage("load checkpoint")?;
    if config.k > ck.tags.len() {
        return Err(CliError::Usage(format!(
            "--k {} exceeds the {} tags of the checkpoint",
            config.k,
            ck.tags.len()
        )));
    }
    let user = config.user.clone().or(input.user_id).unwrap_or_default();
    let record = QuestionRecord {
        id: input.id,
        title: input.title,
        body: input.body,
        tags: Default::default(),
        user_id: user.clone(),
    };
    let encoded = encode_question(&record, &ck.vocab, &ck.tags, ck.meta.max_len);
    let probs = if config.content_only {
        ck.params.predict_content_only(&encoded, &ck.words)
    } else {
        ck.params.predict(&encoded, &ck.users.vector(&user), &ck.words)
    }
    .stage("recommend")?;
    let ranked = rank_tags(&probs, config.k).stage("recommend")?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for (rank, &tag) in ranked.iter().enumerate() {
        let name = ck.tags.tag(tag).expect("ranked index is a tag");
        writeln!(out, "{} {name} {:.6}", rank + 1, probs[tag])
            .context("writing to stdout")
            .stage("recommend")?;
    }
    let known = match (config.content_only, ck.users.contains(&user)) {
        (true, _) => "content-only",
        (false, true) => "known",
        (false, false) => "cold-start",
    };
    info!("recommend: {} tags ({known}, user {user:?})", ranked.len());
    Ok(())
}

fn gradcheck(config: &RunConfig) -> Result<(), CliError> {
    let setup = &config.gradcheck;
    let report = random_grad_check(setup).map_err(|e| CliError::Usage(e.to_string()))?;
    println!(
        "max relative error {:.3e} over {} parameters (m={}, d={}, seq-len {}, {} tags, {} mode, eps {})",
        report.max_rel_error,
        report.numeric.len(),
        setup.input_dim,
        setup.hidden_dim,
        setup.seq_len,
        setup.num_tags,
        setup.mode,
        setup.eps
    );
    if report.max_rel_error < config.tol {
        Ok(())
    } else {
        Err(CliError::Runtime {
            stage: "gradcheck",
            source: anyhow::anyhow!(
                "max relative error {:.3e} at parameter {} is not below {}",
                report.max_rel_error,
                report.worst_index.unwrap_or(0),
                config.tol
            ),
        })
    }
}
