use std::collections::VecDeque;

use crate::error::{Error, Result};

/// A balanced tree with nodes numbered in breadth-first order; node 0 is the
/// root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeSpec {
    pub depth: usize,
    pub branching: usize,
    pub seed: u64,
    parents: Vec<Option<usize>>,
}

/// Builds the balanced tree of the given depth and branching factor.
///
/// The shape is fully determined by `depth` and `branching`; `seed` is
/// recorded so every run description carries one.
pub fn generate_tree(depth: usize, branching: usize, seed: u64) -> Result<TreeSpec> {
    if depth < 1 || branching < 2 {
        return Err(Error::Config(format!(
            "trees need depth >= 1 and branching >= 2, got depth {depth}, branching {branching}"
        )));
    }
    let count = (branching.pow(depth as u32 + 1) - 1) / (branching - 1);
    // In BFS order the children of node i are b·i + 1 ..= b·i + b.
    let parents = (0..count)
        .map(|i| if i == 0 { None } else { Some((i - 1) / branching) })
        .collect();
    Ok(TreeSpec {
        depth,
        branching,
        seed,
        parents,
    })
}

impl TreeSpec {
    pub fn node_count(&self) -> usize {
        self.parents.len()
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parents[node]
    }

    /// `(parent, child)` pairs in BFS order of the child.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.parents
            .iter()
            .enumerate()
            .filter_map(|(child, p)| p.map(|p| (p, child)))
            .collect()
    }

    pub fn label(&self, node: usize) -> String {
        if node == 0 {
            "root".to_string()
        } else {
            format!("n{node}")
        }
    }

    /// Unweighted shortest-path distances between all node pairs.
    pub fn distances(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut adj = vec![Vec::new(); n];
        for (p, c) in self.edges() {
            adj[p].push(c);
            adj[c].push(p);
        }
        (0..n)
            .map(|src| {
                let mut dist = vec![usize::MAX; n];
                dist[src] = 0;
                let mut queue = VecDeque::from([src]);
                while let Some(u) = queue.pop_front() {
                    for &v in &adj[u] {
                        if dist[v] == usize::MAX {
                            dist[v] = dist[u] + 1;
                            queue.push_back(v);
                        }
                    }
                }
                dist
            })
            .collect()
    }
}
