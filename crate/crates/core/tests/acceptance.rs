//! End-to-end acceptance checks. Run with
//! `cargo test -p deeptagrec --test acceptance` (add `--release` for speed);
//! prints one PASS/FAIL line per criterion and exits non-zero on any failure.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::*;
use deeptagrec::corpus::{build_vocab, encode_question, EncodedQuestion};
use deeptagrec::evalkit::{evaluate, exactk_accuracy, precision_at_k, recall_at_k, topk_accuracy};
use deeptagrec::graphembed::{
    adjacency_neighborhoods, embed_graph, exact_objective, transition_probs, AdjacencyGraph, WalkGraph,
};
use deeptagrec::recommender::{
    random_grad_check, train, validation_loss, GradCheckSetup, TrainingMeta, CHECKPOINT_VERSION,
};
use deeptagrec::{
    AggregationMode, Checkpoint, EmbeddingTable, EvalInstance, ModelConfig, ModelParams, NodeEmbeddings,
    QuestionRecord, TrainConfig, UserEmbeddings, UserTagGraph, WalkConfig,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    if took <= limit {
        Ok(())
    } else {
        Err(format!(
            "took {:.1}s, limit {}s",
            took.as_secs_f64(),
            limit.as_secs()
        ))
    }
}

fn gradient_correctness() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for mode in [AggregationMode::Addition, AggregationMode::Concatenation] {
        let setup = GradCheckSetup {
            input_dim: 5,
            hidden_dim: 7,
            seq_len: 4,
            num_tags: 11,
            mode,
            ..Default::default()
        };
        let report = random_grad_check(&setup).map_err(|e| e.to_string())?;
        worst = worst.max(report.max_rel_error);
    }
    within(Duration::from_secs(60), start)?;
    if worst < 1e-4 {
        Ok(format!("max relative error {worst:.2e}"))
    } else {
        Err(format!("max relative error {worst:.2e} ≥ 1e-4"))
    }
}

fn encode_all(
    records: &[QuestionRecord],
    vocab: &deeptagrec::Vocabulary,
    tags: &deeptagrec::TagVocabulary,
    max_len: usize,
) -> Vec<EncodedQuestion> {
    records
        .iter()
        .map(|r| encode_question(r, vocab, tags, max_len))
        .collect()
}

fn overfit() -> Outcome {
    let start = Instant::now();
    let records = random_corpus(50, 100, 20, 3);
    let (vocab, tags) = build_vocab(&records, 1).map_err(|e| e.to_string())?;
    if vocab.len() != 100 || tags.len() != 20 {
        return Err(format!(
            "fixture has {} words and {} tags",
            vocab.len(),
            tags.len()
        ));
    }
    let data = encode_all(&records, &vocab, &tags, 10);
    let emb = EmbeddingTable::random(&vocab, 16, 1.0, &mut ChaCha8Rng::seed_from_u64(4));
    let users = UserEmbeddings::empty(4);
    let config = ModelConfig {
        input_dim: 16,
        hidden_dim: 32,
        user_dim: 4,
        num_tags: 20,
        mode: AggregationMode::Concatenation,
        share_encoder: false,
    };
    let mut model = ModelParams::init(&config, 42);
    let train_cfg = TrainConfig {
        lr: 0.01,
        dropout: 0.0,
        batch_size: 10,
        epochs: 500,
        max_len: 10,
        ..Default::default()
    };
    train(&mut model, &data, &emb, &users, &train_cfg).map_err(|e| e.to_string())?;
    let bce = validation_loss(&model, &data, &emb, &users).map_err(|e| e.to_string())?;
    let report = evaluate(&model, &data, &emb, &users, &[1]).map_err(|e| e.to_string())?;
    let p1 = report.precision[&1];
    within(Duration::from_secs(300), start)?;
    let summary = format!("train BCE {bce:.4}, P@1 {p1}");
    if bce < 0.02 && p1 == 1.0 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn user_signal_lift() -> Outcome {
    let start = Instant::now();
    let records = user_signal_corpus(12, 5);
    let (train_recs, test_recs): (Vec<_>, Vec<_>) = records
        .into_iter()
        .partition(|r| !r.id.starts_with("q9_") && !r.id.starts_with("q10_") && !r.id.starts_with("q11_"));
    let (vocab, tags) = build_vocab(&train_recs, 1).map_err(|e| e.to_string())?;
    let max_len = 8;
    let train_set = encode_all(&train_recs, &vocab, &tags, max_len);
    let test_set = encode_all(&test_recs, &vocab, &tags, max_len);
    let emb = EmbeddingTable::random(&vocab, 16, 1.0, &mut ChaCha8Rng::seed_from_u64(6));

    let graph = UserTagGraph::build(&train_recs);
    let walk = WalkConfig {
        walk_length: 20,
        walks_per_node: 20,
        window: 3,
        ..WalkConfig::default()
    };
    let nodes = embed_graph(&graph, 16, &walk).map_err(|e| e.to_string())?;
    let users = UserEmbeddings::from_node_embeddings(&nodes);
    let config = ModelConfig {
        input_dim: 16,
        hidden_dim: 24,
        user_dim: 16,
        num_tags: tags.len(),
        mode: AggregationMode::Concatenation,
        share_encoder: false,
    };
    let train_cfg = TrainConfig {
        lr: 0.01,
        dropout: 0.2,
        batch_size: 16,
        epochs: 40,
        max_len,
        ..Default::default()
    };
    let recall = |users: &UserEmbeddings| -> Result<f64, String> {
        let mut model = ModelParams::init(&config, 42);
        train(&mut model, &train_set, &emb, users, &train_cfg).map_err(|e| e.to_string())?;
        let r = evaluate(&model, &test_set, &emb, users, &[3]).map_err(|e| e.to_string())?;
        Ok(r.recall[&3])
    };
    let full = recall(&users)?;
    let content = recall(&UserEmbeddings::empty(16))?;
    within(Duration::from_secs(600), start)?;
    let summary = format!(
        "held-out R@3 full {full:.3}, content-only {content:.3}, lift {:.3}",
        full - content
    );
    if full - content >= 0.10 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn node2vec_separation() -> Outcome {
    let (graph, trained) = embed_cliques(42);
    let gap = clique_separation(&graph, &trained);
    let misaligned = users_closer_to_own_tags(&graph, &trained);
    let keys = (0..graph.node_count()).map(|i| graph.key(i)).collect();
    let init = NodeEmbeddings::initialize(keys, 16, 42);
    let hoods = adjacency_neighborhoods(&graph);
    let (before, after) = (exact_objective(&init, &hoods), exact_objective(&trained, &hoods));
    let summary = format!("separation {gap:.3}, objective {before:.2} → {after:.2}");
    if graph.node_count() <= 20 && gap > 0.3 && after > before && misaligned.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}, misaligned users {misaligned:?}"))
    }
}

fn transition_oracle() -> Outcome {
    // prev 0, cur 3; candidates 0 (return, 1/p), 1 (adjacent to prev, 1), 2 (1/q).
    let g = AdjacencyGraph::from_edges(4, &[(0, 3, 1), (0, 1, 1), (3, 1, 1), (3, 2, 1)])
        .map_err(|e| e.to_string())?;
    let probs = transition_probs(&g, Some(0), 3, 0.5, 2.0, false).map_err(|e| e.to_string())?;
    let expected = [(0, 4.0 / 7.0), (1, 2.0 / 7.0), (2, 1.0 / 7.0)];
    let mut worst: f64 = 0.0;
    for (node, p) in expected {
        let got = probs
            .iter()
            .find(|(n, _)| *n == node)
            .map(|(_, p)| *p)
            .ok_or("missing candidate")?;
        worst = worst.max((got - p).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut max_sum_err: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.gen_range(3..10);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(0.5) {
                    edges.push((a, b, rng.gen_range(1..5)));
                }
            }
        }
        let g = AdjacencyGraph::from_edges(n, &edges).map_err(|e| e.to_string())?;
        let p = rng.gen_range(0.25..4.0);
        let q = rng.gen_range(0.25..4.0);
        let weighted = rng.gen_bool(0.5);
        for cur in 0..n {
            let nbrs: Vec<usize> = g.neighbors(cur).iter().map(|(v, _)| *v).collect();
            let prevs = std::iter::once(None).chain(nbrs.iter().map(|&v| Some(v)));
            for prev in prevs {
                if nbrs.is_empty() {
                    continue;
                }
                let dist = transition_probs(&g, prev, cur, p, q, weighted).map_err(|e| e.to_string())?;
                let sum: f64 = dist.iter().map(|(_, p)| p).sum();
                max_sum_err = max_sum_err.max((sum - 1.0).abs());
            }
        }
    }
    let summary = format!("oracle error {worst:.1e}, worst sum error {max_sum_err:.1e}");
    if worst <= 1e-12 && max_sum_err <= 1e-12 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn brute_force(instances: &[EvalInstance], k: usize) -> [f64; 4] {
    let q = instances.len() as f64;
    let mut acc = [0.0; 4];
    for inst in instances {
        let top: BTreeSet<usize> = inst.ranking.iter().take(k).copied().collect();
        let hits = top.intersection(&inst.truth).count() as f64;
        acc[0] += hits / top.len() as f64;
        acc[1] += hits / inst.truth.len() as f64;
        acc[2] += if hits > 0.0 { 1.0 } else { 0.0 };
        acc[3] += if inst.truth.contains(&inst.ranking[k - 1]) {
            1.0
        } else {
            0.0
        };
    }
    acc.map(|a| a / q)
}

fn metric_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let instances: Vec<EvalInstance> = (0..1000)
        .map(|_| {
            let n = 30;
            let size = rng.gen_range(1..=6);
            let mut truth = BTreeSet::new();
            while truth.len() < size {
                truth.insert(rng.gen_range(0..n));
            }
            let mut ranking: Vec<usize> = (0..n).collect();
            ranking.shuffle(&mut rng);
            EvalInstance::new(truth, ranking)
        })
        .collect();
    let mut worst: f64 = 0.0;
    let (mut last_r, mut last_t) = (0.0, 0.0);
    let mut monotone = true;
    for k in 1..=30 {
        let got = [
            precision_at_k(&instances, k),
            recall_at_k(&instances, k),
            topk_accuracy(&instances, k),
            exactk_accuracy(&instances, k),
        ]
        .map(|r| r.expect("valid instances"));
        let want = brute_force(&instances, k);
        for (g, w) in got.iter().zip(want) {
            worst = worst.max((g - w).abs());
        }
        monotone &= got[1] >= last_r && got[2] >= last_t;
        (last_r, last_t) = (got[1], got[2]);
    }
    let summary = format!("max |diff| {worst:.1e} over 1000 instances, k = 1..30, monotone {monotone}");
    if worst <= 1e-12 && monotone {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn determinism() -> Outcome {
    let records = random_corpus(30, 60, 8, 21);
    let (vocab, tags) = build_vocab(&records, 1).map_err(|e| e.to_string())?;
    let data = encode_all(&records, &vocab, &tags, 12);
    let words = EmbeddingTable::random(&vocab, 8, 1.0, &mut ChaCha8Rng::seed_from_u64(1));
    let graph = UserTagGraph::build(&records);
    let walk = WalkConfig {
        walk_length: 10,
        walks_per_node: 5,
        ..WalkConfig::default()
    };
    let run = || -> Result<Checkpoint, String> {
        let nodes = embed_graph(&graph, 6, &walk).map_err(|e| e.to_string())?;
        let users = UserEmbeddings::from_node_embeddings(&nodes);
        let config = ModelConfig {
            input_dim: 8,
            hidden_dim: 10,
            user_dim: 6,
            num_tags: tags.len(),
            mode: AggregationMode::Addition,
            share_encoder: false,
        };
        let mut params = ModelParams::init(&config, 42);
        let train_cfg = TrainConfig {
            epochs: 3,
            batch_size: 8,
            max_len: 12,
            ..Default::default()
        };
        let report = train(&mut params, &data, &words, &users, &train_cfg).map_err(|e| e.to_string())?;
        Ok(Checkpoint {
            params,
            vocab: vocab.clone(),
            tags: tags.clone(),
            words: words.clone(),
            users,
            meta: TrainingMeta {
                seed: 42,
                max_len: 12,
                report,
            },
        })
    };
    let (a, b) = (run()?, run()?);
    let (bytes_a, bytes_b) = (a.to_bytes(), b.to_bytes());
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("model.ckpt");
    deeptagrec::recommender::save_checkpoint(&a, &path).map_err(|e| e.to_string())?;
    let back = deeptagrec::recommender::load_checkpoint(&path).map_err(|e| e.to_string())?;
    let same_runs = bytes_a == bytes_b && a.meta.report.loss_history == b.meta.report.loss_history;
    let round_trip =
        back == a && back.to_bytes() == bytes_a && std::fs::read(&path).ok() == Some(bytes_a.clone());
    let summary = format!(
        "{} checkpoint bytes (format v{CHECKPOINT_VERSION}), identical runs {same_runs}, bit-exact reload {round_trip}",
        bytes_a.len()
    );
    if same_runs && round_trip {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn cold_start() -> Outcome {
    let config = ModelConfig {
        input_dim: 6,
        hidden_dim: 9,
        user_dim: 5,
        num_tags: 13,
        mode: AggregationMode::Addition,
        share_encoder: false,
    };
    let records = random_corpus(20, 40, 13, 8);
    let (vocab, tags) = build_vocab(&records, 1).map_err(|e| e.to_string())?;
    let data = encode_all(&records, &vocab, &tags, 15);
    let words = EmbeddingTable::random(&vocab, 6, 1.0, &mut ChaCha8Rng::seed_from_u64(2));
    let known = UserEmbeddings::from_vectors(5, [("u0".to_string(), vec![0.3, -0.2, 0.9, 0.1, -0.5])])
        .map_err(|e| e.to_string())?;
    let mut model = ModelParams::init(&config, 7);
    let train_cfg = TrainConfig {
        epochs: 2,
        max_len: 15,
        ..Default::default()
    };
    train(&mut model, &data, &words, &known, &train_cfg).map_err(|e| e.to_string())?;
    let mut compared = 0;
    for q in &data {
        let unseen = known.vector("never-seen-user");
        let full = model.predict(q, &unseen, &words).map_err(|e| e.to_string())?;
        let content = model.predict_content_only(q, &words).map_err(|e| e.to_string())?;
        if full
            .iter()
            .map(|v| v.to_bits())
            .ne(content.iter().map(|v| v.to_bits()))
        {
            return Err(format!("question {} differs", q.id));
        }
        compared += full.len();
    }
    Ok(format!(
        "{compared} probabilities bit-identical over {} questions",
        data.len()
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 gradient correctness", gradient_correctness),
        ("2 overfit", overfit),
        ("3 user-signal lift", user_signal_lift),
        ("4 node2vec separation", node2vec_separation),
        ("5 transition-probability oracle", transition_oracle),
        ("6 metric oracle equivalence", metric_oracle),
        ("7 determinism", determinism),
        ("8 cold-start reduction", cold_start),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.contains(o.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  criterion {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail} ({secs:.1}s)");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
