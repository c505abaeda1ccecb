#![allow(dead_code)]

use std::collections::BTreeSet;

use deeptagrec::graphembed::{embed_graph, NodeEmbeddings, NodeKind, UserTagGraph, WalkConfig};
use deeptagrec::QuestionRecord;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Users u1,u2 with tags a,b and users u3,u4 with tags c,d; u2–c bridges
/// the two cliques.
pub fn two_cliques() -> UserTagGraph {
    let mut edges = Vec::new();
    for (users, tags) in [(["u1", "u2"], ["a", "b"]), (["u3", "u4"], ["c", "d"])] {
        for u in users {
            for t in tags {
                edges.push((u, t, 1));
            }
        }
    }
    edges.push(("u2", "c", 1));
    UserTagGraph::from_weighted_edges(edges)
}

pub fn clique_of(name: &str) -> usize {
    usize::from(matches!(name, "u3" | "u4" | "c" | "d"))
}

pub fn clique_walks() -> WalkConfig {
    WalkConfig {
        walk_length: 20,
        walks_per_node: 40,
        window: 3,
        negatives: 5,
        epochs: 5,
        learning_rate: 0.025,
        ..WalkConfig::default()
    }
}

/// Mean intra-clique minus mean inter-clique cosine over all node pairs.
pub fn clique_separation(graph: &UserTagGraph, emb: &NodeEmbeddings) -> f64 {
    let n = graph.node_count();
    let (mut intra, mut inter) = (Vec::new(), Vec::new());
    for i in 0..n {
        for j in i + 1..n {
            let c = cosine(emb.row(i), emb.row(j));
            if clique_of(graph.name(i)) == clique_of(graph.name(j)) {
                intra.push(c);
            } else {
                inter.push(c);
            }
        }
    }
    mean(&intra) - mean(&inter)
}

/// Users whose mean cosine to their own tags does not exceed the mean
/// cosine to the tags they never used.
pub fn users_closer_to_own_tags(graph: &UserTagGraph, emb: &NodeEmbeddings) -> Vec<String> {
    let mut bad = Vec::new();
    for u in (0..graph.node_count()).filter(|&i| graph.kind(i) == NodeKind::User) {
        let (mut adj, mut non) = (Vec::new(), Vec::new());
        for t in (0..graph.node_count()).filter(|&i| graph.kind(i) == NodeKind::Tag) {
            let c = cosine(emb.row(u), emb.row(t));
            if graph.has_edge(u, t) {
                adj.push(c);
            } else {
                non.push(c);
            }
        }
        if !non.is_empty() && mean(&adj) <= mean(&non) {
            bad.push(graph.name(u).to_string());
        }
    }
    bad
}

pub fn embed_cliques(seed: u64) -> (UserTagGraph, NodeEmbeddings) {
    let graph = two_cliques();
    let emb = embed_graph(
        &graph,
        16,
        &WalkConfig {
            seed,
            ..clique_walks()
        },
    )
    .unwrap();
    (graph, emb)
}

fn record(
    id: String,
    title: Vec<String>,
    body: Vec<String>,
    tags: BTreeSet<String>,
    user: String,
) -> QuestionRecord {
    QuestionRecord {
        id,
        title: title.join(" "),
        body: body.join(" "),
        tags,
        user_id: user,
    }
}

/// `n` questions over a vocabulary of exactly `vocab` words (`w0`...) with
/// one to three of `tags` tags each, words and tags drawn at random.
pub fn random_corpus(n: usize, vocab: usize, tags: usize, seed: u64) -> Vec<QuestionRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut words: Vec<usize> = (0..vocab).collect();
    words.shuffle(&mut rng);
    let mut cursor = 0;
    let mut next_word = |rng: &mut ChaCha8Rng| {
        // Every word appears at least once before reuse begins.
        let w = if cursor < vocab {
            words[cursor]
        } else {
            rng.gen_range(0..vocab)
        };
        cursor += 1;
        format!("w{w}")
    };
    (0..n)
        .map(|i| {
            let title = (0..4).map(|_| next_word(&mut rng)).collect();
            let body = (0..6).map(|_| next_word(&mut rng)).collect();
            let k = rng.gen_range(1..=3);
            let mut set = BTreeSet::new();
            // Tag i % tags first, so every tag occurs.
            set.insert(format!("t{}", i % tags));
            while set.len() < k {
                set.insert(format!("t{}", rng.gen_range(0..tags)));
            }
            record(format!("q{i}"), title, body, set, format!("u{}", i % 7))
        })
        .collect()
}

pub const TOPICS: usize = 8;
pub const USERS: usize = 24;

/// Each question carries one topic tag, announced by two of that topic's
/// five keywords in the title, and the asker's personal tag `p{u % 8}`,
/// about which the text says nothing.
pub fn user_signal_corpus(per_user: usize, seed: u64) -> Vec<QuestionRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for q in 0..per_user {
        for u in 0..USERS {
            let topic = rng.gen_range(0..TOPICS);
            let title = (0..3)
                .map(|j| {
                    if j < 2 {
                        format!("k{topic}x{}", rng.gen_range(0..5))
                    } else {
                        format!("n{}", rng.gen_range(0..40))
                    }
                })
                .collect();
            let body = (0..5).map(|_| format!("n{}", rng.gen_range(0..40))).collect();
            let tags = [format!("topic{topic}"), format!("p{}", u % TOPICS)]
                .into_iter()
                .collect();
            out.push(record(format!("q{q}_{u}"), title, body, tags, format!("user{u}")));
        }
    }
    out
}
