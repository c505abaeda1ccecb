//! `deeptagrec` command-line tool.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};

use commands::CliError;
use config::{RunConfig, SEED_ENV};

/// Configuration keys accepted as `--<key>` flags on every subcommand.
const TUNABLES: [(&str, &str); 32] = [
    ("seed", "Seed for every random stream [default: 42]"),
    (
        "corpus.min_count",
        "Minimum word frequency kept in the vocabulary [default: 1]",
    ),
    (
        "corpus.max_len",
        "Question length in tokens after truncation/padding [default: 300]",
    ),
    ("walk.p", "Return parameter [default: 1]"),
    ("walk.q", "In-out parameter [default: 1]"),
    ("walk.length", "Walk length [default: 80]"),
    ("walk.per_node", "Walks started from every node [default: 10]"),
    ("walk.window", "Skip-gram window [default: 10]"),
    ("walk.negatives", "Negative samples per pair [default: 5]"),
    ("walk.epochs", "Skip-gram epochs [default: 5]"),
    ("walk.lr", "Initial skip-gram learning rate [default: 0.025]"),
    ("walk.weighted", "Bias walks by edge weight [default: false]"),
    ("embed.dim", "Node embedding size [default: 128]"),
    ("model.hidden_dim", "GRU hidden size [default: 1000]"),
    (
        "model.user_dim",
        "User vector size when no user embeddings are given [default: 128]",
    ),
    (
        "model.share_encoder",
        "One GRU for title and body [default: false]",
    ),
    ("model.agg", "Fusion: add or concat [default: concat]"),
    ("train.lr", "Learning rate [default: 0.001]"),
    ("train.dropout", "Dropout on the fused vector [default: 0.5]"),
    ("train.batch_size", "Mini-batch size [default: 32]"),
    ("train.epochs", "Maximum epochs [default: 20]"),
    ("train.patience", "Early-stopping patience in epochs [default: 3]"),
    ("train.optimizer", "adam or sgd [default: adam]"),
    ("eval.ks", "Cut-offs for P@k, R@k and top-k [default: 3,5,10]"),
    (
        "eval.exact_ks",
        "Positions for exact-k accuracy [default: eval.ks]",
    ),
    ("recommend.k", "Number of tags to print [default: 5]"),
    ("recommend.user", "Asker id"),
    ("gradcheck.dims", "Word and hidden sizes m,d [default: 5,7]"),
    ("gradcheck.seq_len", "Question length [default: 4]"),
    ("gradcheck.tags", "Number of tags [default: 11]"),
    ("gradcheck.eps", "Finite-difference step [default: 0.0002]"),
    (
        "gradcheck.tol",
        "Largest accepted relative error [default: 0.0001]",
    ),
];

/// (subcommand, description, [(flag, config key, help)])
type CommandDef = (
    &'static str,
    &'static str,
    &'static [(&'static str, &'static str, &'static str)],
);

const COMMANDS: [CommandDef; 7] = [
    (
        "ingest",
        "Build vocabularies and encode a JSON-lines dataset",
        &[
            ("data", "data", "Questions, one JSON object per line"),
            ("out", "out", "Output directory"),
        ],
    ),
    (
        "build-graph",
        "Write the user-tag graph as a weighted edge list",
        &[
            ("data", "data", "Questions, one JSON object per line"),
            ("out", "out", "Edge list (TSV)"),
        ],
    ),
    (
        "embed-users",
        "Learn node2vec embeddings for the user-tag graph",
        &[
            ("graph", "graph", "Edge list written by build-graph"),
            ("dim", "embed.dim", "Embedding size"),
            ("out", "out", "Embedding text file"),
        ],
    ),
    (
        "train",
        "Train the tag recommender and write a checkpoint",
        &[
            ("data", "data", "Training questions"),
            ("word-emb", "word-emb", "Pretrained word vectors (text format)"),
            (
                "user-emb",
                "user-emb",
                "Node embeddings from embed-users; omit for content only",
            ),
            (
                "validation",
                "validation",
                "Held-out questions for early stopping",
            ),
            ("agg", "model.agg", "add or concat"),
            ("out", "out", "Checkpoint path"),
        ],
    ),
    (
        "evaluate",
        "Score a checkpoint on a test set and write a JSON report",
        &[
            ("checkpoint", "checkpoint", "Checkpoint from train"),
            ("test", "test", "Test questions"),
            ("ks", "eval.ks", "Comma-separated cut-offs"),
            ("exact-ks", "eval.exact_ks", "Comma-separated exact-k positions"),
            ("report", "report", "Report path"),
        ],
    ),
    (
        "recommend",
        "Print the top-k tags for one question",
        &[
            ("checkpoint", "checkpoint", "Checkpoint from train"),
            (
                "question",
                "question",
                "JSON object with title, body and optionally user_id",
            ),
            (
                "user",
                "recommend.user",
                "Asker id (overrides the question's user_id)",
            ),
            ("k", "recommend.k", "Number of tags"),
        ],
    ),
    (
        "gradcheck",
        "Compare analytic and finite-difference gradients on a random model",
        &[
            ("dims", "gradcheck.dims", "Word and hidden sizes m,d"),
            ("seq-len", "gradcheck.seq_len", "Question length"),
            ("tags", "gradcheck.tags", "Number of tags"),
            ("tol", "gradcheck.tol", "Largest accepted relative error"),
            ("eps", "gradcheck.eps", "Finite-difference step"),
            ("agg", "model.agg", "add or concat"),
        ],
    ),
];

fn cli() -> Command {
    let mut cmd = Command::new("deeptagrec")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Tag recommendation from question text and asker history")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("config")
                .long("config")
                .global(true)
                .value_name("FILE")
                .help("JSON object of dotted configuration keys"),
        );
    for (key, help) in TUNABLES {
        cmd = cmd.arg(
            Arg::new(key)
                .long(key)
                .global(true)
                .value_name("VALUE")
                .help(help)
                .help_heading("Configuration keys"),
        );
    }
    for (name, about, flags) in COMMANDS {
        let mut sub = Command::new(name).about(about);
        for (flag, _, help) in flags {
            sub = sub.arg(
                Arg::new(*flag)
                    .long(flag)
                    .value_name("VALUE")
                    .action(ArgAction::Set)
                    .help(help),
            );
        }
        if name == "recommend" {
            sub = sub.arg(
                Arg::new("content-only")
                    .long("content-only")
                    .action(ArgAction::SetTrue)
                    .help("Ignore the user and score from the question text alone"),
            );
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

fn resolve(name: &str, sub: &ArgMatches) -> Result<RunConfig, String> {
    let mut config = RunConfig::default();
    if let Some(path) = sub.get_one::<String>("config") {
        config.apply_file(path.as_ref())?;
    }
    if let Ok(seed) = std::env::var(SEED_ENV) {
        config
            .set("seed", &seed)
            .map_err(|e| format!("{SEED_ENV}: {e}"))?;
    }
    for (key, _) in TUNABLES {
        if let Some(v) = sub.get_one::<String>(key) {
            config.set(key, v)?;
        }
    }
    let (_, _, flags) = COMMANDS.iter().find(|c| c.0 == name).expect("known subcommand");
    for (flag, key, _) in flags.iter() {
        if let Some(v) = sub.get_one::<String>(flag) {
            config.set(key, v)?;
        }
    }
    if name == "recommend" && sub.get_flag("content-only") {
        config.set("recommend.content_only", "true")?;
    }
    config.finish()?;
    Ok(config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let config = match resolve(name, sub) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    match commands::run(name, &config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime { stage, source }) => {
            eprintln!("error: {stage} failed: {source:#}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_definition_is_consistent() {
        cli().debug_assert();
    }

    #[test]
    fn flags_beat_file() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("c.json");
        std::fs::write(&file, r#"{"train.lr": 0.5, "recommend.k": 2}"#).unwrap();
        let m = cli()
            .try_get_matches_from([
                "deeptagrec",
                "recommend",
                "--config",
                file.to_str().unwrap(),
                "--train.lr",
                "0.25",
            ])
            .unwrap();
        let (name, sub) = m.subcommand().unwrap();
        let c = resolve(name, sub).unwrap();
        assert_eq!(c.train.lr, 0.25);
        assert_eq!(c.k, 2);
    }
}
