use super::{NodeEmbeddings, UserTagGraph};

/// Each node paired with its graph neighbors.
pub fn adjacency_neighborhoods(graph: &UserTagGraph) -> Vec<(usize, Vec<usize>)> {
    (0..graph.node_count())
        .map(|u| (u, graph.neighbors(u).iter().map(|(n, _)| *n).collect()))
        .collect()
}

/// Full-softmax neighborhood log-likelihood
/// `Σ_u Σ_{n ∈ N(u)} [g(n)·f(u) − ln Σ_v exp(g(v)·f(u))]`,
/// where `f` is the input (exported) table and `g` the context table, the
/// pair skip-gram training scores. Quadratic in the node count; intended
/// for small graphs.
pub fn exact_objective(embeddings: &NodeEmbeddings, neighborhoods: &[(usize, Vec<usize>)]) -> f64 {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut total = 0.0;
    for (u, hood) in neighborhoods {
        if hood.is_empty() {
            continue;
        }
        let fu = embeddings.row(*u);
        let scores: Vec<f64> = (0..embeddings.len())
            .map(|v| dot(embeddings.context_row(v), fu))
            .collect();
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_z = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
        for &n in hood {
            total += scores[n] - log_z;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphembed::embed_graph;
    use crate::graphembed::WalkConfig;

    fn with_rows(input: &[&[f64]], context: &[&[f64]]) -> NodeEmbeddings {
        let keys = (0..input.len()).map(|i| format!("n{i}")).collect();
        NodeEmbeddings::from_tables(keys, input[0].len(), input.concat(), context.concat()).unwrap()
    }

    #[test]
    fn identical_vectors_give_uniform_probabilities() {
        let rows: &[&[f64]] = &[&[0.3, -0.1], &[0.3, -0.1], &[0.3, -0.1]];
        let emb = with_rows(rows, rows);
        let hoods = vec![(0, vec![1, 2]), (1, vec![0]), (2, vec![0])];
        let obj = exact_objective(&emb, &hoods);
        assert!((obj - 4.0 * (1.0f64 / 3.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_context_is_uniform() {
        let emb = with_rows(&[&[1.0, 2.0], &[-3.0, 0.5]], &[&[0.0, 0.0], &[0.0, 0.0]]);
        let obj = exact_objective(&emb, &[(0, vec![1]), (1, vec![0])]);
        assert!((obj - 2.0 * 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn two_node_hand_value() {
        // f1 = (1, 0), f2 = (0.5, 0.5); g1 = (0, 1), g2 = (2, 0).
        // node 1: g2·f1 = 2, g1·f1 = 0  → 2 − ln(1 + e^2)
        // node 2: g1·f2 = 0.5, g2·f2 = 1 → 0.5 − ln(e^0.5 + e^1)
        let emb = with_rows(&[&[1.0, 0.0], &[0.5, 0.5]], &[&[0.0, 1.0], &[2.0, 0.0]]);
        let obj = exact_objective(&emb, &[(0, vec![1]), (1, vec![0])]);
        let expected = 2.0 - (1.0 + 2f64.exp()).ln() + 0.5 - (0.5f64.exp() + 1f64.exp()).ln();
        assert!((obj - expected).abs() < 1e-12);
    }

    #[test]
    fn training_raises_objective() {
        let g = UserTagGraph::from_weighted_edges([
            ("u1", "a", 1),
            ("u1", "b", 1),
            ("u2", "a", 1),
            ("u2", "b", 1),
            ("u3", "c", 1),
            ("u3", "d", 1),
            ("u4", "c", 1),
            ("u4", "d", 1),
            ("u2", "c", 1),
        ]);
        let hoods = adjacency_neighborhoods(&g);
        let cfg = WalkConfig {
            walk_length: 20,
            walks_per_node: 10,
            window: 4,
            epochs: 5,
            ..WalkConfig::default()
        };
        let init = embed_graph(
            &g,
            16,
            &WalkConfig {
                epochs: 0,
                ..cfg.clone()
            },
        )
        .unwrap();
        let trained = embed_graph(&g, 16, &cfg).unwrap();
        let before = exact_objective(&init, &hoods);
        let after = exact_objective(&trained, &hoods);
        assert!(after > before, "{before} -> {after}");
    }
}
