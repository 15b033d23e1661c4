//! Re-validates a recorded trace without going through the engine: removal
//! connectivity via union-find, move legality, conversions, pairwise
//! distance contraction and the recorded outcome.

use std::collections::VecDeque;

use petgraph::unionfind::UnionFind;
use serde::Serialize;
use thiserror::Error;

use crate::engine::{Outcome, Trace};
use crate::graph::{Edge, NodeId};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TraceViolation {
    #[error("graph: {0}")]
    Graph(String),
    #[error("initial placement: {0}")]
    Initial(String),
    #[error("round {round}: {message}")]
    Round { round: usize, message: String },
    #[error("outcome: {0}")]
    Outcome(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceSummary {
    pub rounds: usize,
    pub conversions: usize,
    /// Largest one-round drop of a pairwise distance.
    pub max_contraction: usize,
}

fn bfs(adj: &[Vec<NodeId>], src: NodeId) -> Vec<usize> {
    let mut d = vec![usize::MAX; adj.len()];
    d[src] = 0;
    let mut q = VecDeque::from([src]);
    while let Some(x) = q.pop_front() {
        for &y in &adj[x] {
            if d[y] == usize::MAX {
                d[y] = d[x] + 1;
                q.push_back(y);
            }
        }
    }
    d
}

pub fn check_trace(trace: &Trace) -> Result<TraceSummary, TraceViolation> {
    let n = trace.graph.nodes;
    let mut edges: Vec<Edge> = trace.graph.edges.clone();
    edges.sort_unstable();
    if edges.windows(2).any(|w| w[0] == w[1]) {
        return Err(TraceViolation::Graph("repeated edge".into()));
    }
    if edges.iter().any(|e| e.u() == e.v() || e.v() >= n) {
        return Err(TraceViolation::Graph("loop or out-of-range endpoint".into()));
    }

    let init = &trace.initial;
    let mut seen = vec![false; n];
    for a in &init.agents {
        if a.position >= n || std::mem::replace(&mut seen[a.position], true) {
            return Err(TraceViolation::Initial(format!("bad or shared node {}", a.position)));
        }
    }
    let mut pos: Vec<NodeId> = init.agents.iter().map(|a| a.position).collect();
    let mut informed: Vec<bool> = init.agents.iter().map(|a| a.source).collect();
    meet(&pos, &mut informed);

    let mut max_contraction = 0;
    let mut conversions = 0;
    for (i, r) in trace.rounds.iter().enumerate() {
        let round = i + 1;
        let fail = |message: String| TraceViolation::Round { round, message };
        if r.round != round {
            return Err(fail(format!("numbered {}", r.round)));
        }
        if informed.iter().all(|&s| s) {
            return Err(fail("played after every agent was informed".into()));
        }
        let mut removed = r.removed.clone();
        removed.sort_unstable();
        if let Some(e) = removed.iter().find(|e| edges.binary_search(e).is_err()) {
            return Err(fail(format!("removed edge {e} is not in the graph")));
        }
        let alive: Vec<Edge> = edges
            .iter()
            .filter(|e| removed.binary_search(e).is_err())
            .copied()
            .collect();
        let mut uf = UnionFind::<usize>::new(n);
        let mut parts = n;
        for e in &alive {
            if uf.union(e.u(), e.v()) {
                parts -= 1;
            }
        }
        if parts != 1 {
            return Err(fail(format!("surviving graph has {parts} components")));
        }
        let mut adj = vec![Vec::new(); n];
        for e in &alive {
            adj[e.u()].push(e.v());
            adj[e.v()].push(e.u());
        }

        if r.moves.len() != pos.len() {
            return Err(fail(format!("{} moves for {} agents", r.moves.len(), pos.len())));
        }
        let mut next = pos.clone();
        for (a, &(from, to)) in r.moves.iter().enumerate() {
            if from != pos[a] {
                return Err(fail(format!("agent {a} recorded at {from}, is at {}", pos[a])));
            }
            if to >= n || (to != from && !adj[from].contains(&to)) {
                return Err(fail(format!("agent {a} cannot move {from} -> {to}")));
            }
            next[a] = to;
        }

        let before: Vec<Vec<usize>> = pos.iter().map(|&p| bfs(&adj, p)).collect();
        let after: Vec<Vec<usize>> = next.iter().map(|&p| bfs(&adj, p)).collect();
        for a in 0..pos.len() {
            for b in a + 1..pos.len() {
                let drop = before[a][pos[b]].saturating_sub(after[a][next[b]]);
                max_contraction = max_contraction.max(drop);
                if drop > 2 {
                    return Err(fail(format!("agents {a} and {b} got {drop} closer")));
                }
            }
        }

        pos = next;
        let converted = meet(&pos, &mut informed);
        let mut recorded = r.conversions.clone();
        recorded.sort_unstable();
        if converted != recorded {
            return Err(fail(format!("conversions {recorded:?}, expected {converted:?}")));
        }
        conversions += converted.len();
    }

    let played = trace.rounds.len();
    let solved = informed.iter().all(|&s| s);
    let bad = |m: String| Err(TraceViolation::Outcome(m));
    match trace.outcome {
        Outcome::Solved { round } => {
            if !solved || round != played {
                return bad(format!("solved at {round} but {played} rounds played, all informed: {solved}"));
            }
        }
        Outcome::AdversaryCycle { period, repeat_round } => {
            if solved || period == 0 || repeat_round != played + 1 || period > played {
                return bad(format!("cycle of period {period} at round {repeat_round} after {played} rounds"));
            }
            let now = class_key(&pos, &informed);
            let then = class_key(&replay(trace, played - period), &informed_at(trace, played - period));
            if now != then {
                return bad(format!("states {period} rounds apart differ"));
            }
        }
        Outcome::RoundLimit { rounds } => {
            if solved || rounds != played {
                return bad(format!("round limit {rounds} after {played} rounds, all informed: {solved}"));
            }
        }
    }
    Ok(TraceSummary {
        rounds: played,
        conversions,
        max_contraction,
    })
}

/// Informs agents sharing a node with an informed one; returns the nodes
/// of new conversions, sorted.
fn meet(pos: &[NodeId], informed: &mut [bool]) -> Vec<NodeId> {
    let hot: Vec<NodeId> = pos
        .iter()
        .zip(informed.iter())
        .filter(|(_, &s)| s)
        .map(|(&p, _)| p)
        .collect();
    let mut out = Vec::new();
    for (p, s) in pos.iter().zip(informed.iter_mut()) {
        if !*s && hot.contains(p) {
            *s = true;
            out.push(*p);
        }
    }
    out.sort_unstable();
    out
}

fn replay(trace: &Trace, rounds: usize) -> Vec<NodeId> {
    let mut pos: Vec<NodeId> = trace.initial.agents.iter().map(|a| a.position).collect();
    for r in &trace.rounds[..rounds] {
        for (p, &(_, to)) in pos.iter_mut().zip(&r.moves) {
            *p = to;
        }
    }
    pos
}

fn informed_at(trace: &Trace, rounds: usize) -> Vec<bool> {
    let mut informed: Vec<bool> = trace.initial.agents.iter().map(|a| a.source).collect();
    meet(&replay(trace, 0), &mut informed);
    for k in 1..=rounds {
        meet(&replay(trace, k), &mut informed);
    }
    informed
}

/// Sorted (position, informed) pairs.
fn class_key(pos: &[NodeId], informed: &[bool]) -> Vec<(NodeId, bool)> {
    let mut v: Vec<(NodeId, bool)> = pos.iter().copied().zip(informed.iter().copied()).collect();
    v.sort_unstable();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{simulate, Configuration};
    use crate::graph::*;
    use crate::strategies::{GreedyPath, GridFlipflop, RandomTree, TowardSource};
    use crate::engine::AdversaryPolicy;

    #[test]
    fn engine_traces_pass() {
        let g = make_ring(7).unwrap();
        let c = Configuration::new(&[0], &[3, 5]);
        let t = simulate(&g, &c, &mut TowardSource, &mut RandomTree::new(4), 50).unwrap();
        let s = check_trace(&t).unwrap();
        assert_eq!(s.conversions, t.conversions());

        let g = make_grid(3, 3).unwrap();
        let adv = GridFlipflop::new(3, 3).unwrap();
        let c = adv.place(&g, 5, 1).unwrap().unwrap();
        let t = simulate(&g, &c, &mut GreedyPath, &mut adv.clone(), 10).unwrap();
        assert!(matches!(t.outcome, Outcome::AdversaryCycle { period: 2, .. }));
        check_trace(&t).unwrap();
    }

    #[test]
    fn tampering_is_caught() {
        let g = make_path(5).unwrap();
        let c = Configuration::new(&[0], &[4]);
        let t = simulate(&g, &c, &mut TowardSource, &mut RandomTree::new(1), 20).unwrap();

        let mut cut = t.clone();
        cut.rounds[0].removed.push(Edge::new(1, 2));
        assert!(matches!(check_trace(&cut), Err(TraceViolation::Round { round: 1, .. })));

        let mut jump = t.clone();
        jump.rounds[0].moves[0] = (0, 2);
        assert!(check_trace(&jump).is_err());

        let mut early = t.clone();
        early.outcome = Outcome::Solved { round: 1 };
        assert!(matches!(check_trace(&early), Err(TraceViolation::Outcome(_))));

        let mut silent = t;
        silent.rounds.last_mut().unwrap().conversions.clear();
        assert!(check_trace(&silent).is_err());
    }
}
