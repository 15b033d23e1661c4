//! Exhaustive small graphs as bit masks over the node pairs `(a, b)`,
//! `a < b`, in lexicographic order.

use itertools::Itertools;

use crate::graph::{Graph, NodeId};

pub fn pairs(n: usize) -> Vec<(NodeId, NodeId)> {
    (0..n).tuple_combinations().collect()
}

pub fn mask_graph(n: usize, mask: u32) -> Graph {
    let edges = pairs(n)
        .into_iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, e)| e);
    Graph::new(n, edges).expect("mask graphs are simple")
}

fn connected(n: usize, pairs: &[(NodeId, NodeId)], mask: u32) -> bool {
    let mut reach = 1u32;
    loop {
        let before = reach;
        for (i, &(a, b)) in pairs.iter().enumerate() {
            if mask >> i & 1 == 1 && (reach >> a & 1 == 1 || reach >> b & 1 == 1) {
                reach |= 1 << a | 1 << b;
            }
        }
        if reach == before {
            return reach.count_ones() as usize == n;
        }
    }
}

/// Every connected labelled graph on `n` nodes.
pub fn connected_masks(n: usize) -> Vec<u32> {
    let p = pairs(n);
    assert!(p.len() < 32, "too many node pairs for a u32 mask");
    (0..1u32 << p.len()).filter(|&m| connected(n, &p, m)).collect()
}

/// Isomorphism-invariant form: smallest mask over all relabellings.
pub struct Canon {
    /// For each permutation, where each pair index lands.
    maps: Vec<Vec<usize>>,
}

impl Canon {
    pub fn new(n: usize) -> Self {
        let p = pairs(n);
        let index = |a: NodeId, b: NodeId| p.iter().position(|&e| e == (a.min(b), a.max(b))).expect("pair");
        let maps = (0..n)
            .permutations(n)
            .map(|perm| p.iter().map(|&(a, b)| index(perm[a], perm[b])).collect())
            .collect();
        Canon { maps }
    }

    pub fn canonical(&self, mask: u32) -> u32 {
        self.maps
            .iter()
            .map(|m| {
                m.iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .fold(0u32, |acc, (_, &j)| acc | 1 << j)
            })
            .min()
            .expect("at least one permutation")
    }
}

/// Labelled trees from Prüfer sequences.
pub fn all_trees(n: usize) -> Vec<Graph> {
    if n == 1 {
        return vec![Graph::new(1, std::iter::empty()).expect("single node")];
    }
    if n == 2 {
        return vec![Graph::new(2, [(0, 1)]).expect("edge")];
    }
    (0..n - 2)
        .map(|_| 0..n)
        .multi_cartesian_product()
        .map(|seq| prufer_tree(n, &seq))
        .collect()
}

pub fn prufer_tree(n: usize, seq: &[NodeId]) -> Graph {
    let mut degree = vec![1; n];
    for &x in seq {
        degree[x] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &x in seq {
        let leaf = (0..n).find(|&y| degree[y] == 1).expect("a leaf remains");
        edges.push((leaf, x));
        degree[leaf] -= 1;
        degree[x] -= 1;
    }
    let rest: Vec<NodeId> = (0..n).filter(|&y| degree[y] == 1).collect();
    edges.push((rest[0], rest[1]));
    Graph::new(n, edges).expect("Prüfer sequences give trees")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn known_counts() {
        // connected labelled graphs on 4 and 5 nodes; unlabelled classes
        assert_eq!(connected_masks(4).len(), 38);
        assert_eq!(connected_masks(5).len(), 728);
        let c = Canon::new(5);
        let classes: BTreeSet<u32> = connected_masks(5).iter().map(|&m| c.canonical(m)).collect();
        assert_eq!(classes.len(), 21);
        assert_eq!(all_trees(5).len(), 125);
        assert!(all_trees(6).iter().all(|t| t.is_tree()));
    }
}
