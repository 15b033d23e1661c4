//! Flip-flop adversary for grids: alternately keep two Hamiltonian paths so
//! that greedy path agents walk back and forth without ever meeting.
//!
//! Placement: source at (0,0), column 1 full of ignorant agents, and every
//! later column filled except its top cell (even columns) or its bottom cell
//! (odd columns). That is (rows-1)(cols-1)+1 ignorant agents.
//!
//! The two paths are found by search over pairs of Hamiltonian paths,
//! accepting the first pair (in a fixed order) under which greedy play from
//! the placement repeats with period 2 and no conversion. On square grids
//! the second path is tried first as the transpose of the first.

use crate::engine::{AdversaryPolicy, Configuration, PolicyError, Surviving};
use crate::graph::{make_grid, EdgeId, Graph, NodeId};
use crate::strategies::greedy::greedy_moves;

/// Largest grid the path-pair search handles.
pub const MAX_FLIPFLOP_NODES: usize = 16;

#[derive(Debug, Clone)]
pub struct GridFlipflop {
    rows: usize,
    cols: usize,
    // kept edge ids of the two alternating paths
    paths: [Vec<EdgeId>; 2],
    phase: usize,
}

pub fn flipflop_placement(rows: usize, cols: usize) -> (NodeId, Vec<NodeId>) {
    let id = |r: usize, c: usize| r * cols + c;
    let mut ignorant: Vec<NodeId> = (0..rows).map(|r| id(r, 1)).collect();
    for c in 2..cols {
        let skip = if c % 2 == 0 { 0 } else { rows - 1 };
        ignorant.extend((0..rows).filter(|&r| r != skip).map(|r| id(r, c)));
    }
    ignorant.sort_unstable();
    (0, ignorant)
}

fn hamiltonian_paths(g: &Graph) -> Vec<Vec<NodeId>> {
    let n = g.node_count();
    let mut out = Vec::new();
    let mut path = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn rec(g: &Graph, path: &mut Vec<NodeId>, used: &mut [bool], out: &mut Vec<Vec<NodeId>>) {
        if path.len() == g.node_count() {
            // each undirected path once
            if path[0] < path[path.len() - 1] {
                out.push(path.clone());
            }
            return;
        }
        let x = *path.last().expect("nonempty");
        for y in g.neighbors(x) {
            if !used[y] {
                used[y] = true;
                path.push(y);
                rec(g, path, used, out);
                path.pop();
                used[y] = false;
            }
        }
    }
    for s in 0..n {
        used[s] = true;
        path.push(s);
        rec(g, &mut path, &mut used, &mut out);
        path.pop();
        used[s] = false;
    }
    out
}

fn path_edges(g: &Graph, p: &[NodeId]) -> Vec<EdgeId> {
    let mut e: Vec<EdgeId> = p
        .windows(2)
        .map(|w| g.edge_id(w[0], w[1]).expect("grid edge"))
        .collect();
    e.sort_unstable();
    e
}

/// Plays greedy against the alternation; true if the multiset state comes
/// back with period 2 before any conversion.
fn flips(g: &Graph, start: &Configuration, keep: [&[EdgeId]; 2]) -> bool {
    let removed: [Vec<EdgeId>; 2] = [0, 1].map(|i| {
        (0..g.edge_count())
            .filter(|e| keep[i].binary_search(e).is_err())
            .collect()
    });
    let mut history = vec![start.class_key()];
    let mut cur = start.clone();
    for round in 0..6 {
        let view = Surviving::without(g, &removed[round % 2]);
        let Ok(moves) = greedy_moves(&view, &cur) else {
            return false;
        };
        for (a, &to) in cur.agents.iter_mut().zip(&moves) {
            a.position = to;
        }
        if !cur.convert().is_empty() {
            return false;
        }
        history.push(cur.class_key());
        let t = history.len() - 1;
        if t >= 2 && history[t] == history[t - 2] {
            return true;
        }
    }
    false
}

impl GridFlipflop {
    pub fn new(rows: usize, cols: usize) -> Result<Self, PolicyError> {
        if rows < 2 || cols < 2 || rows * cols < 6 {
            return Err(PolicyError::Inapplicable(format!(
                "flip-flop needs a grid with at least 2 rows, 2 columns and 6 nodes, got {rows}x{cols}"
            )));
        }
        if rows * cols > MAX_FLIPFLOP_NODES {
            return Err(PolicyError::Inapplicable(format!(
                "flip-flop path search is limited to {MAX_FLIPFLOP_NODES} nodes"
            )));
        }
        let g = make_grid(rows, cols).expect("valid grid");
        let (s, ign) = flipflop_placement(rows, cols);
        let start = Configuration::new(&[s], &ign);
        let paths: Vec<Vec<EdgeId>> = hamiltonian_paths(&g).iter().map(|p| path_edges(&g, p)).collect();
        if rows == cols {
            let transpose = |e: EdgeId| {
                let edge = g.edge(e);
                let t = |x: NodeId| (x % cols) * cols + x / cols;
                g.edge_id(t(edge.u()), t(edge.v())).expect("square grid")
            };
            for p in &paths {
                let mut q: Vec<EdgeId> = p.iter().map(|&e| transpose(e)).collect();
                q.sort_unstable();
                if flips(&g, &start, [p, &q]) {
                    return Ok(GridFlipflop {
                        rows,
                        cols,
                        paths: [p.clone(), q],
                        phase: 0,
                    });
                }
            }
        }
        for p in &paths {
            for q in &paths {
                if p != q && flips(&g, &start, [p, q]) {
                    return Ok(GridFlipflop {
                        rows,
                        cols,
                        paths: [p.clone(), q.clone()],
                        phase: 0,
                    });
                }
            }
        }
        Err(PolicyError::Inapplicable(format!(
            "no flip-flop path pair for the {rows}x{cols} grid"
        )))
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Kept edges of the two alternating paths.
    pub fn paths(&self) -> &[Vec<EdgeId>; 2] {
        &self.paths
    }
}

impl AdversaryPolicy for GridFlipflop {
    fn name(&self) -> String {
        format!("grid_flipflop:{}x{}", self.rows, self.cols)
    }

    fn decide(&mut self, g: &Graph, _c: &Configuration) -> Result<Vec<EdgeId>, PolicyError> {
        if g.grid_dims() != Some((self.rows, self.cols)) && g.node_count() != self.rows * self.cols {
            return Err(PolicyError::Inapplicable("graph is not the flip-flop grid".into()));
        }
        let keep = &self.paths[self.phase];
        self.phase ^= 1;
        Ok((0..g.edge_count())
            .filter(|e| keep.binary_search(e).is_err())
            .collect())
    }

    fn place(
        &self,
        _g: &Graph,
        ignorant: usize,
        sources: usize,
    ) -> Option<Result<Configuration, PolicyError>> {
        let (s, ign) = flipflop_placement(self.rows, self.cols);
        if sources != 1 || ignorant != ign.len() {
            return Some(Err(PolicyError::Inapplicable(format!(
                "flip-flop places 1 source and {} ignorant agents",
                ign.len()
            ))));
        }
        Some(Ok(Configuration::new(&[s], &ign)))
    }

    fn memory(&self) -> String {
        self.phase.to_string()
    }

    fn anonymous(&self) -> bool {
        true
    }

    fn boxed_clone(&self) -> Box<dyn AdversaryPolicy> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{simulate, Outcome};
    use crate::strategies::greedy::GreedyPath;

    #[test]
    fn placement_counts() {
        for rows in 2..6 {
            for cols in 2..6 {
                let (_, ign) = flipflop_placement(rows, cols);
                assert_eq!(ign.len(), (rows - 1) * (cols - 1) + 1);
            }
        }
        assert_eq!(flipflop_placement(3, 3).1, vec![1, 4, 5, 7, 8]);
    }

    #[test]
    fn three_by_three_cycles_without_conversions() {
        let g = make_grid(3, 3).unwrap();
        let mut adv = GridFlipflop::new(3, 3).unwrap();
        let init = adv.place(&g, 5, 1).unwrap().unwrap();
        let t = simulate(&g, &init, &mut GreedyPath, &mut adv, 200).unwrap();
        assert_eq!(t.conversions(), 0);
        assert!(matches!(t.outcome, Outcome::AdversaryCycle { period: 2, .. }));
        // first greedy step moves the source one cell along the kept path
        assert_eq!(t.rounds[0].moves[0], (0, 1));
    }

    #[test]
    fn rejects_small_grids() {
        assert!(GridFlipflop::new(2, 2).is_err());
        assert!(GridFlipflop::new(1, 6).is_err());
    }
}
