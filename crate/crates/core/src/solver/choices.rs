//! Adversary options as surviving-edge bitmasks.

use crate::graph::Graph;

/// Bit `e` set = edge `e` survives.
pub type EdgeMask = u64;

pub const MAX_MASK_EDGES: usize = 64;

pub fn full_mask(g: &Graph) -> EdgeMask {
    if g.edge_count() == 64 {
        u64::MAX
    } else {
        (1u64 << g.edge_count()) - 1
    }
}

pub fn mask_connected(g: &Graph, mask: EdgeMask) -> bool {
    g.is_connected_with(|e| mask >> e & 1 == 1)
}

/// Every spanning tree of `g`, or `None` once more than `limit` exist.
pub fn spanning_trees(g: &Graph, limit: usize) -> Option<Vec<EdgeMask>> {
    assert!(g.edge_count() <= MAX_MASK_EDGES);
    let n = g.node_count();
    let m = g.edge_count();
    let mut out = Vec::new();
    let mut parent: Vec<usize> = (0..n).collect();

    fn find(parent: &[usize], mut x: usize) -> usize {
        while parent[x] != x {
            x = parent[x];
        }
        x
    }

    // include/exclude each edge in order; union-find without path
    // compression so a union can be undone by resetting one parent
    #[allow(clippy::too_many_arguments)]
    fn rec(
        g: &Graph,
        e: usize,
        chosen: EdgeMask,
        picked: usize,
        parent: &mut Vec<usize>,
        out: &mut Vec<EdgeMask>,
        limit: usize,
        m: usize,
    ) -> bool {
        let need = g.node_count() - 1;
        if picked == need {
            out.push(chosen);
            return out.len() <= limit;
        }
        if e == m || m - e < need - picked {
            return true;
        }
        let edge = g.edge(e);
        let (a, b) = (find(parent, edge.u()), find(parent, edge.v()));
        if a != b {
            parent[a] = b;
            let ok = rec(g, e + 1, chosen | 1 << e, picked + 1, parent, out, limit, m);
            parent[a] = a;
            if !ok {
                return false;
            }
        }
        // skipping e must still allow a spanning tree
        let above = if e + 1 >= 64 { 0 } else { full_mask(g) & !((1u64 << (e + 1)) - 1) };
        let rest = chosen | above;
        if mask_connected(g, rest) {
            return rec(g, e + 1, chosen, picked, parent, out, limit, m);
        }
        true
    }

    if n == 1 {
        return Some(vec![0]);
    }
    rec(g, 0, 0, 0, &mut parent, &mut out, limit, m).then_some(out)
}

/// Every edge subset that keeps `g` connected, or `None` past `limit`.
pub fn connected_subsets(g: &Graph, limit: usize) -> Option<Vec<EdgeMask>> {
    let m = g.edge_count();
    if m >= 40 {
        return None;
    }
    let mut out = Vec::new();
    for mask in 0..(1u64 << m) {
        if (mask.count_ones() as usize) + 1 >= g.node_count() && mask_connected(g, mask) {
            out.push(mask);
            if out.len() > limit {
                return None;
            }
        }
    }
    Some(out)
}
