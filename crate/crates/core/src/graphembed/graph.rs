use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};

use super::GraphError;
use crate::corpus::QuestionRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    User,
    Tag,
}

impl NodeKind {
    pub fn prefix(self) -> &'static str {
        match self {
            NodeKind::User => "u:",
            NodeKind::Tag => "t:",
        }
    }
}

/// Undirected bipartite graph between users and tags.
///
/// Users come first (sorted by id), then tags (sorted by name), so node
/// indices do not depend on record order. Adjacency lists are sorted by
/// neighbor index and carry co-occurrence counts as weights.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UserTagGraph {
    kinds: Vec<NodeKind>,
    names: Vec<String>,
    lookup: HashMap<(NodeKind, String), usize>,
    adjacency: Vec<Vec<(usize, u32)>>,
    user_count: usize,
}

impl UserTagGraph {
    /// One edge per (user, tag) pair seen in `records`, weighted by the
    /// number of questions in which that user used that tag.
    pub fn build(records: &[QuestionRecord]) -> Self {
        let mut counts: BTreeMap<(&str, &str), u32> = BTreeMap::new();
        for r in records {
            for tag in &r.tags {
                *counts.entry((r.user_id.as_str(), tag.as_str())).or_default() += 1;
            }
        }
        Self::from_weighted_edges(counts.into_iter().map(|((u, t), w)| (u, t, w)))
    }

    /// Builds from `(user, tag, weight)` triples; repeated pairs add up.
    pub fn from_weighted_edges<'a, I>(edges: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str, u32)>,
    {
        let mut merged: BTreeMap<(String, String), u32> = BTreeMap::new();
        for (u, t, w) in edges {
            *merged.entry((u.to_owned(), t.to_owned())).or_default() += w;
        }
        let users: BTreeSet<&str> = merged.keys().map(|(u, _)| u.as_str()).collect();
        let tags: BTreeSet<&str> = merged.keys().map(|(_, t)| t.as_str()).collect();

        let mut g = UserTagGraph {
            user_count: users.len(),
            ..Default::default()
        };
        for (kind, names) in [(NodeKind::User, &users), (NodeKind::Tag, &tags)] {
            for name in names.iter() {
                g.lookup.insert((kind, name.to_string()), g.names.len());
                g.kinds.push(kind);
                g.names.push(name.to_string());
            }
        }
        g.adjacency = vec![Vec::new(); g.names.len()];
        for ((u, t), w) in &merged {
            let ui = g.lookup[&(NodeKind::User, u.clone())];
            let ti = g.lookup[&(NodeKind::Tag, t.clone())];
            g.adjacency[ui].push((ti, *w));
            g.adjacency[ti].push((ui, *w));
        }
        for adj in &mut g.adjacency {
            adj.sort_unstable();
        }
        g
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency[..self.user_count].iter().map(Vec::len).sum()
    }

    pub fn user_count(&self) -> usize {
        self.user_count
    }

    pub fn tag_count(&self) -> usize {
        self.names.len() - self.user_count
    }

    pub fn kind(&self, node: usize) -> NodeKind {
        self.kinds[node]
    }

    pub fn name(&self, node: usize) -> &str {
        &self.names[node]
    }

    /// `u:<id>` or `t:<tag>`.
    pub fn key(&self, node: usize) -> String {
        format!("{}{}", self.kinds[node].prefix(), self.names[node])
    }

    pub fn find(&self, kind: NodeKind, name: &str) -> Option<usize> {
        self.lookup.get(&(kind, name.to_owned())).copied()
    }

    /// Neighbors of `node` with edge weights, sorted by index.
    pub fn neighbors(&self, node: usize) -> &[(usize, u32)] {
        &self.adjacency[node]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency
            .get(a)
            .is_some_and(|adj| adj.binary_search_by_key(&b, |(n, _)| *n).is_ok())
    }

    pub fn edge_weight(&self, a: usize, b: usize) -> Option<u32> {
        let adj = self.adjacency.get(a)?;
        adj.binary_search_by_key(&b, |(n, _)| *n).ok().map(|i| adj[i].1)
    }

    /// Every edge once, as `(user node, tag node, weight)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        (0..self.user_count).flat_map(move |u| self.adjacency[u].iter().map(move |&(t, w)| (u, t, w)))
    }

    /// Tab-separated `u:<user>\tt:<tag>\t<weight>` lines.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<(), GraphError> {
        for (u, t, weight) in self.edges() {
            for name in [self.name(u), self.name(t)] {
                if name.contains(['\t', '\n', '\r']) {
                    return Err(GraphError::Name(name.to_owned()));
                }
            }
            writeln!(w, "{}\t{}\t{weight}", self.key(u), self.key(t))?;
        }
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Self, GraphError> {
        let mut edges = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: &str| GraphError::EdgeList {
                line: i + 1,
                message: message.to_owned(),
            };
            let mut f = line.split('\t');
            let (Some(u), Some(t), Some(w), None) = (f.next(), f.next(), f.next(), f.next()) else {
                return Err(bad("expected three tab-separated fields"));
            };
            let u = u
                .strip_prefix("u:")
                .ok_or_else(|| bad("first field must start with `u:`"))?;
            let t = t
                .strip_prefix("t:")
                .ok_or_else(|| bad("second field must start with `t:`"))?;
            let w: u32 = w
                .trim()
                .parse()
                .map_err(|_| bad("weight is not a positive integer"))?;
            if w == 0 {
                return Err(bad("weight must be positive"));
            }
            edges.push((u.to_owned(), t.to_owned(), w));
        }
        Ok(Self::from_weighted_edges(
            edges.iter().map(|(u, t, w)| (u.as_str(), t.as_str(), *w)),
        ))
    }
}
