use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::corpus::EncodedUser;
use crate::error::{Error, Result};

pub const EXTERNAL_THRESHOLD: u64 = 20;
pub const MAX_DISTANCE: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeRole {
    Dataset,
    External,
}

/// Undirected, unweighted retweet graph. Nodes are numbered with dataset
/// users first (in id order), then external users (in id order).
#[derive(Debug, Clone, PartialEq)]
pub struct SocialGraph {
    ids: Vec<String>,
    roles: Vec<NodeRole>,
    index: BTreeMap<String, usize>,
    adjacency: Vec<Vec<usize>>,
}

impl SocialGraph {
    /// Graph over `ids` with the given roles and undirected `edges` given as
    /// index pairs. Self-loops and duplicates are dropped.
    pub fn from_edges(
        ids: Vec<String>,
        roles: Vec<NodeRole>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        if ids.len() != roles.len() {
            return Err(Error::Shape(format!("{} ids but {} roles", ids.len(), roles.len())));
        }
        let n = ids.len();
        let mut sets = vec![BTreeSet::new(); n];
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::OutOfRange {
                    index: a.max(b),
                    len: n,
                });
            }
            if a != b {
                sets[a].insert(b);
                sets[b].insert(a);
            }
        }
        let index = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        Ok(Self {
            ids,
            roles,
            index,
            adjacency: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn id(&self, node: usize) -> &str {
        &self.ids[node]
    }

    pub fn role(&self, node: usize) -> NodeRole {
        self.roles[node]
    }

    pub fn node(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Edges with `a < b`, in order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, ns)| ns.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
    }

    /// `idA<TAB>idB` per edge.
    pub fn edge_list(&self) -> String {
        let mut out = String::new();
        for (a, b) in self.edges() {
            out.push_str(&self.ids[a]);
            out.push('\t');
            out.push_str(&self.ids[b]);
            out.push('\n');
        }
        out
    }

    /// Hop distances from `source`, indexed by node; `None` when unreachable
    /// within `max_d`.
    pub fn distances_from(&self, source: usize, max_d: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].expect("queued nodes have a distance");
            if d == max_d {
                continue;
            }
            for &w in &self.adjacency[v] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

/// Builds the graph from dataset users and their retweets. External users
/// are kept when dataset users retweeted them at least `threshold` times in
/// total.
pub fn build_graph<'a>(users: impl IntoIterator<Item = &'a EncodedUser>, threshold: u64) -> SocialGraph {
    let users: BTreeMap<&str, &EncodedUser> = users.into_iter().map(|u| (u.id.as_str(), u)).collect();
    let mut external: BTreeMap<&str, u64> = BTreeMap::new();
    for u in users.values() {
        for rt in &u.retweets {
            if !users.contains_key(rt.user_id.as_str()) {
                *external.entry(rt.user_id.as_str()).or_insert(0) += u64::from(rt.count);
            }
        }
    }
    let mut ids: Vec<String> = users.keys().map(|s| s.to_string()).collect();
    let mut roles = vec![NodeRole::Dataset; ids.len()];
    for (id, total) in external {
        if total >= threshold {
            ids.push(id.to_string());
            roles.push(NodeRole::External);
        }
    }
    let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut edges = Vec::new();
    for (a, u) in users.values().enumerate() {
        for rt in u.retweets.iter().filter(|rt| rt.count >= 1) {
            if let Some(&b) = index.get(rt.user_id.as_str()) {
                edges.push((a, b));
            }
        }
    }
    SocialGraph::from_edges(ids, roles, edges).expect("indices come from the id list")
}

/// Exact hop distances from `source` up to `max_d`, keyed by node id.
pub fn bfs_distances(graph: &SocialGraph, source: &str, max_d: usize) -> Result<BTreeMap<String, usize>> {
    let s = graph
        .node(source)
        .ok_or_else(|| Error::UnknownNode(source.to_string()))?;
    Ok(graph
        .distances_from(s, max_d)
        .into_iter()
        .enumerate()
        .filter_map(|(v, d)| d.map(|d| (graph.id(v).to_string(), d)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::EncodedRetweet;

    fn user(id: &str, rts: &[(&str, u32)]) -> EncodedUser {
        EncodedUser {
            id: id.into(),
            timeline: vec![],
            description: None,
            retweets: rts
                .iter()
                .map(|(u, c)| EncodedRetweet {
                    user_id: u.to_string(),
                    count: *c,
                })
                .collect(),
        }
    }

    #[test]
    fn external_threshold_boundary() {
        let users = [user("a", &[("x", 10), ("y", 10)]), user("b", &[("x", 9), ("y", 10)])];
        let g = build_graph(&users, 20);
        assert_eq!(g.node("x"), None);
        assert_eq!(g.node("y").map(|n| g.role(n)), Some(NodeRole::External));
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn mutual_retweets_make_one_edge() {
        let users = [user("a", &[("b", 1)]), user("b", &[("a", 3)]), user("c", &[("c", 5)])];
        let g = build_graph(&users, 20);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edge_list(), "a\tb\n");
    }

    #[test]
    fn path_distances() {
        let users = [user("a", &[("b", 1)]), user("b", &[("c", 1)]), user("c", &[])];
        let g = build_graph(&users, 20);
        let d = bfs_distances(&g, "a", 7).unwrap();
        assert_eq!(d["a"], 0);
        assert_eq!(d["c"], 2);
        assert!(!bfs_distances(&g, "a", 1).unwrap().contains_key("c"));
        assert!(matches!(bfs_distances(&g, "zz", 7), Err(Error::UnknownNode(_))));
    }
}
