//! Round semantics of the broadcast game.
//!
//! Each round the adversary removes a set of edges that leaves the graph
//! connected, the agents then move (stay, or cross one surviving edge) with
//! full knowledge of the surviving graph, and finally every ignorant agent
//! sharing a node with a source agent becomes a source. Agents swapping
//! across an edge do not meet.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Edge, EdgeId, Graph, GraphJson, NodeId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("edge {0} is not in the graph")]
    UnknownEdge(Edge),
    #[error("removal disconnects the graph")]
    Disconnecting,
    #[error("expected {expected} moves, got {got}")]
    MoveCount { expected: usize, got: usize },
    #[error("agent {agent} cannot move from {from} to {to}")]
    IllegalMove {
        agent: usize,
        from: NodeId,
        to: NodeId,
    },
    #[error("node {0} is out of range")]
    InvalidNode(NodeId),
    #[error("initial positions must be distinct (node {0} repeated)")]
    SharedStart(NodeId),
    #[error("agents {a} and {b} got {drop} closer in one round")]
    Contraction { a: usize, b: usize, drop: usize },
    #[error("round {round}: {source}")]
    Round {
        round: usize,
        #[source]
        source: Box<EngineError>,
    },
    #[error("round {round}: {policy} failed: {message}")]
    Policy {
        round: usize,
        policy: String,
        message: String,
    },
    #[error("max_rounds must be at least 1")]
    NoRounds,
}

/// Error raised by a policy that cannot act on the state it was given.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PolicyError {
    #[error("strategy not applicable: {0}")]
    Inapplicable(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Agent {
    pub position: NodeId,
    pub source: bool,
}

/// Positions and classes of all agents, indexed by agent id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration {
    pub agents: Vec<Agent>,
}

impl Configuration {
    /// Source agents get ids `0..sources.len()`, ignorant agents follow.
    pub fn new(sources: &[NodeId], ignorant: &[NodeId]) -> Self {
        let agents = sources
            .iter()
            .map(|&p| Agent {
                position: p,
                source: true,
            })
            .chain(ignorant.iter().map(|&p| Agent {
                position: p,
                source: false,
            }))
            .collect();
        Configuration { agents }
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn position(&self, id: usize) -> NodeId {
        self.agents[id].position
    }

    pub fn is_source(&self, id: usize) -> bool {
        self.agents[id].source
    }

    pub fn positions(&self) -> Vec<NodeId> {
        self.agents.iter().map(|a| a.position).collect()
    }

    pub fn source_ids(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.agents.len()).filter(|&i| self.agents[i].source)
    }

    pub fn ignorant_ids(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.agents.len()).filter(|&i| !self.agents[i].source)
    }

    /// Sorted multiset of source positions.
    pub fn source_positions(&self) -> Vec<NodeId> {
        let mut v: Vec<NodeId> = self.source_ids().map(|i| self.position(i)).collect();
        v.sort_unstable();
        v
    }

    /// Sorted multiset of ignorant positions.
    pub fn ignorant_positions(&self) -> Vec<NodeId> {
        let mut v: Vec<NodeId> = self.ignorant_ids().map(|i| self.position(i)).collect();
        v.sort_unstable();
        v
    }

    pub fn source_count(&self) -> usize {
        self.source_ids().count()
    }

    pub fn ignorant_count(&self) -> usize {
        self.ignorant_ids().count()
    }

    pub fn is_solved(&self) -> bool {
        self.agents.iter().all(|a| a.source)
    }

    pub fn validate(&self, g: &Graph) -> Result<(), EngineError> {
        match self.agents.iter().find(|a| a.position >= g.node_count()) {
            Some(a) => Err(EngineError::InvalidNode(a.position)),
            None => Ok(()),
        }
    }

    pub fn validate_initial(&self, g: &Graph) -> Result<(), EngineError> {
        self.validate(g)?;
        let mut seen = vec![false; g.node_count()];
        for a in &self.agents {
            if std::mem::replace(&mut seen[a.position], true) {
                return Err(EngineError::SharedStart(a.position));
            }
        }
        Ok(())
    }

    /// Converts ignorant agents sharing a node with a source; returns the
    /// nodes where conversions happened, one entry per converted agent.
    pub fn convert(&mut self) -> Vec<NodeId> {
        let informed: Vec<NodeId> = self.source_positions();
        let mut out = Vec::new();
        for a in &mut self.agents {
            if !a.source && informed.binary_search(&a.position).is_ok() {
                a.source = true;
                out.push(a.position);
            }
        }
        out.sort_unstable();
        out
    }

    /// Multiset view: sorted ignorant then sorted source positions.
    pub fn class_key(&self) -> (Vec<NodeId>, Vec<NodeId>) {
        (self.ignorant_positions(), self.source_positions())
    }
}

/// The graph as it stands after one round's removal.
#[derive(Debug, Clone)]
pub struct Surviving<'g> {
    graph: &'g Graph,
    alive: Vec<bool>,
}

impl<'g> Surviving<'g> {
    pub fn full(graph: &'g Graph) -> Self {
        Surviving {
            graph,
            alive: vec![true; graph.edge_count()],
        }
    }

    /// Panics on an out-of-range edge id.
    pub fn without(graph: &'g Graph, removed: &[EdgeId]) -> Self {
        let mut alive = vec![true; graph.edge_count()];
        for &e in removed {
            alive[e] = false;
        }
        Surviving { graph, alive }
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn is_alive(&self, e: EdgeId) -> bool {
        self.alive[e]
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.graph.edge_id(a, b).is_some_and(|e| self.alive[e])
    }

    /// Sorted surviving neighbors.
    pub fn neighbors(&self, x: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.graph
            .adjacency(x)
            .iter()
            .filter(|&&(_, e)| self.alive[e])
            .map(|&(y, _)| y)
    }

    pub fn removed(&self) -> Vec<EdgeId> {
        (0..self.alive.len()).filter(|&e| !self.alive[e]).collect()
    }

    pub fn distances(&self, src: NodeId) -> Vec<usize> {
        self.graph.distances_with(src, |e| self.alive[e])
    }

    pub fn is_connected(&self) -> bool {
        self.graph.is_connected_with(|e| self.alive[e])
    }

    /// Can an agent go from `a` to `b` this round?
    pub fn can_move(&self, a: NodeId, b: NodeId) -> bool {
        a == b || self.has_edge(a, b)
    }

    /// Shortest path `from ..= to` taking the lowest-id neighbor one step
    /// closer at every hop; `None` if unreachable.
    pub fn shortest_path(&self, from: NodeId, to: NodeId) -> Option<Vec<NodeId>> {
        let dist = self.distances(to);
        if dist[from] == usize::MAX {
            return None;
        }
        let mut path = vec![from];
        let mut x = from;
        while x != to {
            x = self
                .neighbors(x)
                .find(|&y| dist[y] + 1 == dist[x])
                .expect("distance labels are consistent");
            path.push(x);
        }
        Some(path)
    }
}

/// True iff removing `removed` leaves `g` connected.
pub fn validate_removal(g: &Graph, removed: &[Edge]) -> Result<bool, EngineError> {
    let ids = edge_ids(g, removed)?;
    Ok(Surviving::without(g, &ids).is_connected())
}

pub fn edge_ids(g: &Graph, edges: &[Edge]) -> Result<Vec<EdgeId>, EngineError> {
    edges
        .iter()
        .map(|e| g.edge_id(e.u(), e.v()).ok_or(EngineError::UnknownEdge(*e)))
        .collect()
}

/// Plays one round: removal, simultaneous moves, then conversions.
pub fn apply_round(
    g: &Graph,
    config: &Configuration,
    removed: &[Edge],
    moves: &[NodeId],
) -> Result<(Configuration, Vec<NodeId>), EngineError> {
    let ids = edge_ids(g, removed)?;
    let view = Surviving::without(g, &ids);
    if !view.is_connected() {
        return Err(EngineError::Disconnecting);
    }
    step(&view, config, moves)
}

fn step(
    view: &Surviving<'_>,
    config: &Configuration,
    moves: &[NodeId],
) -> Result<(Configuration, Vec<NodeId>), EngineError> {
    if moves.len() != config.len() {
        return Err(EngineError::MoveCount {
            expected: config.len(),
            got: moves.len(),
        });
    }
    let mut next = config.clone();
    for (i, (&to, agent)) in moves.iter().zip(&mut next.agents).enumerate() {
        if to >= view.graph().node_count() || !view.can_move(agent.position, to) {
            return Err(EngineError::IllegalMove {
                agent: i,
                from: agent.position,
                to,
            });
        }
        agent.position = to;
    }
    let conversions = next.convert();
    Ok((next, conversions))
}

/// Agent side of the game.
pub trait AgentPolicy {
    fn name(&self) -> String;

    /// Target node of every agent (its current node to stay).
    fn decide(
        &mut self,
        view: &Surviving<'_>,
        config: &Configuration,
    ) -> Result<Vec<NodeId>, PolicyError>;

    /// Snapshot of private state, used to detect repeated game states.
    fn memory(&self) -> String {
        String::new()
    }

    /// Whether decisions depend only on the class multisets (not on ids).
    fn anonymous(&self) -> bool {
        false
    }

    fn boxed_clone(&self) -> Box<dyn AgentPolicy>;
}

/// Adversary side of the game.
pub trait AdversaryPolicy {
    fn name(&self) -> String;

    /// Edge ids to remove this round; must keep the graph connected.
    fn decide(&mut self, g: &Graph, config: &Configuration) -> Result<Vec<EdgeId>, PolicyError>;

    /// Initial placement, for strategies that pick where agents start.
    fn place(
        &self,
        _g: &Graph,
        _ignorant: usize,
        _sources: usize,
    ) -> Option<Result<Configuration, PolicyError>> {
        None
    }

    fn memory(&self) -> String {
        String::new()
    }

    fn anonymous(&self) -> bool {
        false
    }

    fn boxed_clone(&self) -> Box<dyn AdversaryPolicy>;
}

impl Clone for Box<dyn AgentPolicy> {
    fn clone(&self) -> Self {
        self.boxed_clone()
    }
}

impl Clone for Box<dyn AdversaryPolicy> {
    fn clone(&self) -> Self {
        self.boxed_clone()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub removed: Vec<Edge>,
    /// `(from, to)` per agent id.
    pub moves: Vec<(NodeId, NodeId)>,
    pub conversions: Vec<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    /// Last ignorant agent converted in this round (0 = already solved).
    Solved { round: usize },
    /// The state at the start of `repeat_round` equals the one at
    /// `repeat_round - period`.
    AdversaryCycle { period: usize, repeat_round: usize },
    RoundLimit { rounds: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub graph: GraphJson,
    pub agent_policy: String,
    pub adversary_policy: String,
    pub initial: Configuration,
    pub rounds: Vec<RoundRecord>,
    pub outcome: Outcome,
}

impl Trace {
    pub fn conversions(&self) -> usize {
        self.rounds.iter().map(|r| r.conversions.len()).sum()
    }

    /// Configuration after every round, starting with the initial one.
    pub fn configurations(&self) -> Vec<Configuration> {
        let mut out = vec![self.initial.clone()];
        let mut cur = self.initial.clone();
        cur.convert();
        for r in &self.rounds {
            for (a, &(_, to)) in cur.agents.iter_mut().zip(&r.moves) {
                a.position = to;
            }
            cur.convert();
            out.push(cur.clone());
        }
        out
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }
}

/// Repeated-state key: class multisets when both sides ignore ids.
fn state_key(
    config: &Configuration,
    agents: &dyn AgentPolicy,
    adversary: &dyn AdversaryPolicy,
) -> (Vec<(NodeId, bool)>, String, String) {
    let mut cfg: Vec<(NodeId, bool)> = config
        .agents
        .iter()
        .map(|a| (a.position, a.source))
        .collect();
    if agents.anonymous() && adversary.anonymous() {
        cfg.sort_unstable();
    }
    (cfg, agents.memory(), adversary.memory())
}

/// Largest pairwise distance drop between consecutive positions, measured in
/// the round's surviving graph.
fn check_contraction(
    view: &Surviving<'_>,
    before: &Configuration,
    after: &Configuration,
) -> Result<(), EngineError> {
    let n = before.len();
    let dist_before: Vec<Vec<usize>> = (0..n).map(|i| view.distances(before.position(i))).collect();
    let dist_after: Vec<Vec<usize>> = (0..n).map(|i| view.distances(after.position(i))).collect();
    for a in 0..n {
        for b in a + 1..n {
            let d0 = dist_before[a][before.position(b)];
            let d1 = dist_after[a][after.position(b)];
            if d0 > d1 + 2 {
                return Err(EngineError::Contraction { a, b, drop: d0 - d1 });
            }
        }
    }
    Ok(())
}

/// Runs the game until solved, a repeated state, or `max_rounds`.
pub fn simulate(
    g: &Graph,
    initial: &Configuration,
    agents: &mut dyn AgentPolicy,
    adversary: &mut dyn AdversaryPolicy,
    max_rounds: usize,
) -> Result<Trace, EngineError> {
    if max_rounds < 1 {
        return Err(EngineError::NoRounds);
    }
    initial.validate(g)?;
    let mut config = initial.clone();
    config.convert();
    let mut rounds = Vec::new();
    let mut seen: HashMap<(Vec<(NodeId, bool)>, String, String), usize> = HashMap::new();
    let mut outcome = Outcome::RoundLimit { rounds: max_rounds };
    for round in 1..=max_rounds + 1 {
        if config.is_solved() {
            outcome = Outcome::Solved { round: round - 1 };
            break;
        }
        if let Some(prev) = seen.insert(state_key(&config, agents, adversary), round) {
            outcome = Outcome::AdversaryCycle {
                period: round - prev,
                repeat_round: round,
            };
            break;
        }
        if round > max_rounds {
            break;
        }
        let wrap = |e: EngineError| EngineError::Round {
            round,
            source: Box::new(e),
        };
        let mut removed = adversary
            .decide(g, &config)
            .map_err(|e| EngineError::Policy {
                round,
                policy: adversary.name(),
                message: e.to_string(),
            })?;
        removed.sort_unstable();
        removed.dedup();
        if let Some(&bad) = removed.iter().find(|&&e| e >= g.edge_count()) {
            return Err(EngineError::Policy {
                round,
                policy: adversary.name(),
                message: format!("edge id {bad} out of range"),
            });
        }
        let view = Surviving::without(g, &removed);
        if !view.is_connected() {
            return Err(wrap(EngineError::Disconnecting));
        }
        let moves = agents
            .decide(&view, &config)
            .map_err(|e| EngineError::Policy {
                round,
                policy: agents.name(),
                message: e.to_string(),
            })?;
        let (next, conversions) = step(&view, &config, &moves).map_err(wrap)?;
        check_contraction(&view, &config, &next).map_err(wrap)?;
        rounds.push(RoundRecord {
            round,
            removed: removed.iter().map(|&e| g.edge(e)).collect(),
            moves: config
                .agents
                .iter()
                .zip(&next.agents)
                .map(|(a, b)| (a.position, b.position))
                .collect(),
            conversions,
        });
        config = next;
    }
    Ok(Trace {
        graph: g.to_json(),
        agent_policy: agents.name(),
        adversary_policy: adversary.name(),
        initial: initial.clone(),
        rounds,
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::*;

    #[derive(Clone)]
    struct Stay;
    impl AgentPolicy for Stay {
        fn name(&self) -> String {
            "stay".into()
        }
        fn decide(&mut self, _: &Surviving<'_>, c: &Configuration) -> Result<Vec<NodeId>, PolicyError> {
            Ok(c.positions())
        }
        fn anonymous(&self) -> bool {
            true
        }
        fn boxed_clone(&self) -> Box<dyn AgentPolicy> {
            Box::new(self.clone())
        }
    }

    #[derive(Clone)]
    struct NoCut;
    impl AdversaryPolicy for NoCut {
        fn name(&self) -> String {
            "none".into()
        }
        fn decide(&mut self, _: &Graph, _: &Configuration) -> Result<Vec<EdgeId>, PolicyError> {
            Ok(vec![])
        }
        fn anonymous(&self) -> bool {
            true
        }
        fn boxed_clone(&self) -> Box<dyn AdversaryPolicy> {
            Box::new(self.clone())
        }
    }

    #[test]
    fn removal_validity() {
        let ring = make_ring(5).unwrap();
        assert!(validate_removal(&ring, &[Edge::new(0, 1)]).unwrap());
        assert!(!validate_removal(&ring, &[Edge::new(0, 1), Edge::new(2, 3)]).unwrap());
        assert_eq!(
            validate_removal(&ring, &[Edge::new(0, 2)]),
            Err(EngineError::UnknownEdge(Edge::new(0, 2)))
        );
        let g = make_theta(&[3, 3, 3]).unwrap();
        let t = g.theta_layout().unwrap();
        let mid = |i| t.path_edge(i, 1);
        assert!(validate_removal(&g, &[mid(0), mid(1)]).unwrap());
        assert!(!validate_removal(&g, &[mid(0), mid(1), mid(2)]).unwrap());
    }

    #[test]
    fn meeting_and_swapping() {
        let p3 = make_path(3).unwrap();
        let c = Configuration::new(&[0], &[2]);
        let (next, conv) = apply_round(&p3, &c, &[], &[1, 1]).unwrap();
        assert_eq!(conv, vec![1]);
        assert!(next.is_solved());

        let p2 = make_path(2).unwrap();
        let c = Configuration::new(&[0], &[1]);
        let (next, conv) = apply_round(&p2, &c, &[], &[1, 0]).unwrap();
        assert!(conv.is_empty());
        assert_eq!(next.positions(), vec![1, 0]);

        let g = make_grid(2, 3).unwrap();
        let c = Configuration::new(&[0], &[4, 5]);
        let (next, conv) = apply_round(&g, &c, &[], &c.positions()).unwrap();
        assert_eq!(next, c);
        assert!(conv.is_empty());
    }

    #[test]
    fn illegal_rounds_rejected() {
        let ring = make_ring(5).unwrap();
        let c = Configuration::new(&[0], &[2]);
        assert!(matches!(
            apply_round(&ring, &c, &[Edge::new(0, 1)], &[1, 2]),
            Err(EngineError::IllegalMove { agent: 0, .. })
        ));
        assert!(matches!(
            apply_round(&ring, &c, &[], &[0]),
            Err(EngineError::MoveCount { .. })
        ));
        assert_eq!(
            apply_round(&ring, &c, &[Edge::new(0, 1), Edge::new(3, 4)], &[0, 2]),
            Err(EngineError::Disconnecting)
        );
    }

    #[test]
    fn idle_game_cycles_immediately() {
        let ring = make_ring(5).unwrap();
        let c = Configuration::new(&[0], &[2]);
        let t = simulate(&ring, &c, &mut Stay, &mut NoCut, 10).unwrap();
        assert_eq!(
            t.outcome,
            Outcome::AdversaryCycle {
                period: 1,
                repeat_round: 2
            }
        );
        assert_eq!(t.rounds.len(), 1);
    }

    #[test]
    fn already_solved_is_round_zero() {
        let ring = make_ring(5).unwrap();
        let c = Configuration::new(&[0, 3], &[]);
        let t = simulate(&ring, &c, &mut Stay, &mut NoCut, 10).unwrap();
        assert_eq!(t.outcome, Outcome::Solved { round: 0 });
        assert!(simulate(&ring, &c, &mut Stay, &mut NoCut, 0).is_err());
    }

    #[test]
    fn shortest_path_prefers_low_ids() {
        let ring = make_ring(6).unwrap();
        let view = Surviving::full(&ring);
        assert_eq!(view.shortest_path(0, 3).unwrap(), vec![0, 1, 2, 3]);
        let cut = Surviving::without(&ring, &[ring.edge_id(1, 2).unwrap()]);
        assert_eq!(cut.shortest_path(0, 3).unwrap(), vec![0, 5, 4, 3]);
    }
}
