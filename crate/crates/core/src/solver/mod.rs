//! Exhaustive solving of small broadcast games.
//!
//! States are class multisets (sorted source positions, sorted ignorant
//! positions). The agents' winning region is the least fixed point of
//! "for every adversary option there is a joint move into the region",
//! computed sweep by sweep so that the sweep in which a state enters is its
//! minimax round count.
//!
//! By default the adversary is only offered spanning trees: it has no
//! pieces of its own, so keeping fewer edges can only shrink the agents'
//! options, and every connected survivor contains a spanning tree. The
//! `AllSubsets` mode keeps every connectivity-preserving removal so this
//! can be checked.

mod check;
pub mod choices;
mod extract;

use std::fmt;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::Configuration;
use crate::graph::{Edge, Graph, NodeId};

pub use check::{check_adversary, check_agents, WitnessStep};
pub use choices::EdgeMask;
pub use extract::{TableAdversary, TablePolicy};
pub(crate) use extract::best_table_move;

/// Value of a state the agents cannot win from.
pub const INFINITE: u32 = u32::MAX;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolverError {
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("policy error: {0}")]
    Policy(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branching {
    SpanningTrees,
    AllSubsets,
}

/// Limits that keep exhaustive search at desk scale.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    pub max_nodes: usize,
    pub max_agents: usize,
    pub max_states: usize,
    pub max_choices: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_nodes: 12,
            max_agents: 5,
            max_states: 2_000_000,
            max_choices: 100_000,
        }
    }
}

/// Class-multiset view of a configuration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonicalState {
    pub ignorant: Vec<NodeId>,
    pub sources: Vec<NodeId>,
}

impl CanonicalState {
    pub fn new(mut ignorant: Vec<NodeId>, mut sources: Vec<NodeId>) -> Self {
        ignorant.sort_unstable();
        sources.sort_unstable();
        CanonicalState { ignorant, sources }
    }

    pub fn of(config: &Configuration) -> Self {
        CanonicalState::new(config.ignorant_positions(), config.source_positions())
    }

    /// Configuration with sources first, each class in position order.
    pub fn to_configuration(&self) -> Configuration {
        Configuration::new(&self.sources, &self.ignorant)
    }

    pub fn agents(&self) -> usize {
        self.ignorant.len() + self.sources.len()
    }

    fn pack(&self) -> u64 {
        let s: Vec<u8> = self.sources.iter().map(|&p| p as u8).collect();
        let i: Vec<u8> = self.ignorant.iter().map(|&p| p as u8).collect();
        pack(&s, &i)
    }

    fn unpack(key: u64) -> Self {
        let (s, i) = unpack(key);
        CanonicalState {
            ignorant: i.into_iter().map(usize::from).collect(),
            sources: s.into_iter().map(usize::from).collect(),
        }
    }
}

impl fmt::Display for CanonicalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ignorant {:?} sources {:?}", self.ignorant, self.sources)
    }
}

// layout: 4 bits source count, 4 bits ignorant count, then 4 bits per
// position, sources first; both lists sorted
fn pack(sources: &[u8], ignorant: &[u8]) -> u64 {
    let mut key = sources.len() as u64 | (ignorant.len() as u64) << 4;
    let mut shift = 8;
    for &p in sources.iter().chain(ignorant) {
        key |= (p as u64) << shift;
        shift += 4;
    }
    key
}

fn unpack(key: u64) -> (Vec<u8>, Vec<u8>) {
    let s = (key & 15) as usize;
    let i = (key >> 4 & 15) as usize;
    let at = |j: usize| (key >> (8 + 4 * j) & 15) as u8;
    ((0..s).map(at).collect(), (s..s + i).map(at).collect())
}

/// Round count the agents can guarantee from every state with a fixed
/// number of agents and at least `min_sources` sources.
pub struct ValueTable {
    graph: Graph,
    agents: usize,
    min_sources: usize,
    goal_sources: usize,
    branching: Branching,
    choices: Vec<EdgeMask>,
    // destinations per choice and node: the node itself, then neighbors
    options: Vec<Vec<Vec<u8>>>,
    keys: Vec<u64>,
    index: FxHashMap<u64, u32>,
    values: Vec<u32>,
}

impl fmt::Debug for ValueTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ValueTable")
            .field("agents", &self.agents)
            .field("states", &self.keys.len())
            .field("choices", &self.choices.len())
            .finish()
    }
}

/// Sorted multisets of `size` elements from `0..n`.
fn multisets(n: usize, size: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(size);
    fn rec(n: usize, size: usize, from: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for x in from..n {
            cur.push(x as u8);
            rec(n, size, x, cur, out);
            cur.pop();
        }
    }
    rec(n, size, 0, &mut cur, &mut out);
    out
}

fn binomial(n: usize, k: usize) -> usize {
    let mut r: usize = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

impl ValueTable {
    /// Solves the game where the agents aim to reach `goal_sources` sources.
    pub fn build(
        g: &Graph,
        agents: usize,
        min_sources: usize,
        goal_sources: usize,
        branching: Branching,
        budget: &Budget,
    ) -> Result<Self, SolverError> {
        let n = g.node_count();
        if n > budget.max_nodes || n > 16 {
            return Err(SolverError::Budget(format!(
                "{n} nodes exceeds the limit of {}",
                budget.max_nodes.min(16)
            )));
        }
        if agents > budget.max_agents || agents > 14 {
            return Err(SolverError::Budget(format!(
                "{agents} agents exceeds the limit of {}",
                budget.max_agents.min(14)
            )));
        }
        if min_sources < 1 || min_sources > agents {
            return Err(SolverError::InvalidState(format!(
                "need between 1 and {agents} sources, got {min_sources}"
            )));
        }
        if g.edge_count() > choices::MAX_MASK_EDGES {
            return Err(SolverError::Budget(format!(
                "{} edges exceeds the limit of {}",
                g.edge_count(),
                choices::MAX_MASK_EDGES
            )));
        }
        let state_count: usize = (min_sources..=agents)
            .map(|s| binomial(n + s - 1, s).saturating_mul(binomial(n + agents - s - 1, agents - s)))
            .sum();
        if state_count > budget.max_states {
            return Err(SolverError::Budget(format!(
                "{state_count} states exceeds the limit of {}",
                budget.max_states
            )));
        }
        let choice_list = match branching {
            Branching::SpanningTrees => choices::spanning_trees(g, budget.max_choices),
            Branching::AllSubsets => choices::connected_subsets(g, budget.max_choices),
        }
        .ok_or_else(|| {
            SolverError::Budget(format!(
                "more than {} adversary options",
                budget.max_choices
            ))
        })?;
        let options = choice_list
            .iter()
            .map(|&mask| {
                (0..n)
                    .map(|x| {
                        std::iter::once(x as u8)
                            .chain(
                                g.adjacency(x)
                                    .iter()
                                    .filter(|&&(_, e)| mask >> e & 1 == 1)
                                    .map(|&(y, _)| y as u8),
                            )
                            .collect()
                    })
                    .collect()
            })
            .collect();

        let mut keys = Vec::with_capacity(state_count);
        for s in min_sources..=agents {
            let src = multisets(n, s);
            let ign = multisets(n, agents - s);
            for a in &src {
                for b in &ign {
                    // a state with an ignorant agent on a source node is
                    // never produced by the engine; skip it
                    if b.iter().any(|p| a.binary_search(p).is_ok()) {
                        continue;
                    }
                    keys.push(pack(a, b));
                }
            }
        }
        let index: FxHashMap<u64, u32> = keys
            .iter()
            .enumerate()
            .map(|(i, &k)| (k, i as u32))
            .collect();
        let values = keys
            .iter()
            .map(|&k| if (k & 15) as usize >= goal_sources { 0 } else { INFINITE })
            .collect();
        let mut table = ValueTable {
            graph: g.clone(),
            agents,
            min_sources,
            goal_sources,
            branching,
            choices: choice_list,
            options,
            keys,
            index,
            values,
        };
        table.solve();
        Ok(table)
    }

    fn solve(&mut self) {
        let mut refuter = vec![0u32; self.keys.len()];
        let mut t = 1;
        loop {
            let mut entered = Vec::new();
            for i in 0..self.keys.len() {
                if self.values[i] != INFINITE {
                    continue;
                }
                match self.refute(self.keys[i], t, refuter[i] as usize) {
                    Some(c) => refuter[i] = c as u32,
                    None => entered.push(i),
                }
            }
            if entered.is_empty() {
                break;
            }
            for i in entered {
                self.values[i] = t;
            }
            t += 1;
        }
    }

    /// An adversary option under which no joint move reaches a state of
    /// value below `t`, trying `first` before the others.
    fn refute(&self, key: u64, t: u32, first: usize) -> Option<usize> {
        let order = std::iter::once(first).chain((0..self.choices.len()).filter(|&c| c != first));
        for c in order {
            let escaped = self.any_successor(key, c, &mut |succ, _| self.value_of(succ) < t);
            if !escaped {
                return Some(c);
            }
        }
        None
    }

    fn value_of(&self, key: u64) -> u32 {
        self.values[self.index[&key] as usize]
    }

    /// Calls `f` on successors of `key` under option `choice` until it
    /// returns true. Agents of one class on one node take nondecreasing
    /// option indices, so each outcome multiset is produced once per
    /// distinct assignment. `f` also receives the destinations in the
    /// state's agent order (sources by position, then ignorant by position).
    fn any_successor(
        &self,
        key: u64,
        choice: usize,
        f: &mut dyn FnMut(u64, &[u8]) -> bool,
    ) -> bool {
        let (src, ign) = unpack(key);
        let s = src.len();
        let agents: Vec<u8> = src.iter().chain(&ign).copied().collect();
        let opts = &self.options[choice];
        let mut idx = vec![0usize; agents.len()];
        let mut dest = vec![0u8; agents.len()];

        #[allow(clippy::too_many_arguments)]
        fn rec(
            j: usize,
            s: usize,
            agents: &[u8],
            opts: &[Vec<u8>],
            idx: &mut [usize],
            dest: &mut [u8],
            f: &mut dyn FnMut(u64, &[u8]) -> bool,
        ) -> bool {
            if j == agents.len() {
                let mut mask = 0u32;
                for &p in &dest[..s] {
                    mask |= 1 << p;
                }
                let mut ns: Vec<u8> = dest[..s].to_vec();
                let mut ni: Vec<u8> = Vec::with_capacity(agents.len() - s);
                for &p in &dest[s..] {
                    if mask >> p & 1 == 1 {
                        ns.push(p);
                    } else {
                        ni.push(p);
                    }
                }
                ns.sort_unstable();
                ni.sort_unstable();
                return f(pack(&ns, &ni), dest);
            }
            let same_group = j > 0 && j != s && agents[j] == agents[j - 1];
            let start = if same_group { idx[j - 1] } else { 0 };
            let here = &opts[agents[j] as usize];
            for o in start..here.len() {
                idx[j] = o;
                dest[j] = here[o];
                if rec(j + 1, s, agents, opts, idx, dest, f) {
                    return true;
                }
            }
            false
        }

        rec(0, s, &agents, opts, &mut idx, &mut dest, f)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn branching(&self) -> Branching {
        self.branching
    }

    pub fn state_count(&self) -> usize {
        self.keys.len()
    }

    pub fn goal_sources(&self) -> usize {
        self.goal_sources
    }

    /// Minimax rounds to the goal, `None` when the adversary wins.
    pub fn value(&self, state: &CanonicalState) -> Result<Option<u32>, SolverError> {
        let key = self.key_of(state)?;
        let v = self.value_of(key);
        Ok((v != INFINITE).then_some(v))
    }

    fn key_of(&self, state: &CanonicalState) -> Result<u64, SolverError> {
        let n = self.graph.node_count();
        if state.agents() != self.agents {
            return Err(SolverError::InvalidState(format!(
                "table holds {} agents, state has {}",
                self.agents,
                state.agents()
            )));
        }
        if state.sources.len() < self.min_sources {
            return Err(SolverError::InvalidState(format!(
                "table needs at least {} sources",
                self.min_sources
            )));
        }
        if let Some(&p) = state.ignorant.iter().chain(&state.sources).find(|&&p| p >= n) {
            return Err(SolverError::InvalidState(format!("node {p} out of range")));
        }
        // conversion is applied before lookup, as in the engine
        let mut cfg = state.to_configuration();
        cfg.convert();
        let key = CanonicalState::of(&cfg).pack();
        if !self.index.contains_key(&key) {
            return Err(SolverError::InvalidState(format!("{state} is not in the table")));
        }
        Ok(key)
    }

    /// Every state with its value, for table export.
    pub fn entries(&self) -> impl Iterator<Item = (CanonicalState, Option<u32>)> + '_ {
        self.keys.iter().zip(&self.values).map(|(&k, &v)| {
            (CanonicalState::unpack(k), (v != INFINITE).then_some(v))
        })
    }

    /// A surviving edge set under which the agents cannot get closer to the
    /// goal from `state`, if the adversary wins there.
    pub fn refuting_choice(&self, state: &CanonicalState) -> Result<Option<Vec<Edge>>, SolverError> {
        let key = self.key_of(state)?;
        if self.value_of(key) != INFINITE {
            return Ok(None);
        }
        let c = self
            .refute(key, INFINITE, 0)
            .expect("losing states have a refuting option");
        Ok(Some(self.mask_edges(self.choices[c])))
    }

    fn mask_edges(&self, mask: EdgeMask) -> Vec<Edge> {
        (0..self.graph.edge_count())
            .filter(|&e| mask >> e & 1 == 1)
            .map(|e| self.graph.edge(e))
            .collect()
    }
}

/// Who places the agents before round 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Placement {
    /// Agents must win from every distinct-node placement.
    Adversarial,
    /// Agents win from at least one distinct-node placement.
    AgentsChoose,
    Given(Configuration),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    Agents,
    Adversary,
}

/// Outcome of a solver query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolverResult {
    pub winner: Winner,
    /// Rounds under optimal play when the agents win.
    pub optimal_rounds: Option<u32>,
    pub states_explored: usize,
    /// Name of the strategy that can be extracted for the winning side.
    pub extracted_policy: Option<String>,
    /// Play witnessing the result (model checking only).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witness: Vec<WitnessStep>,
    /// The losing placement, for placement-quantified queries.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub critical_state: Option<CanonicalState>,
}

impl SolverResult {
    pub fn agents_win(&self) -> bool {
        self.winner == Winner::Agents
    }
}

/// Does the agent side win from `state`?
pub fn agents_can_win(
    g: &Graph,
    state: &CanonicalState,
    branching: Branching,
    budget: &Budget,
) -> Result<bool, SolverError> {
    if state.ignorant.is_empty() {
        return Ok(true);
    }
    let table = ValueTable::build(
        g,
        state.agents(),
        state.sources.len(),
        state.agents(),
        branching,
        budget,
    )?;
    Ok(table.value(state)?.is_some())
}

/// All placements of `sources` source and `ignorant` ignorant agents on
/// distinct nodes, as class multisets.
pub fn distinct_placements(n: usize, ignorant: usize, sources: usize) -> Vec<CanonicalState> {
    let mut out = Vec::new();
    for src in multisets(n, sources) {
        if src.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        for ign in multisets(n, ignorant) {
            if ign.windows(2).any(|w| w[0] == w[1]) || ign.iter().any(|p| src.contains(p)) {
                continue;
            }
            out.push(CanonicalState::new(
                ign.iter().map(|&p| p as usize).collect(),
                src.iter().map(|&p| p as usize).collect(),
            ));
        }
    }
    out
}

/// Broadcast with `ignorant` ignorant and `sources` source agents.
pub fn solve_placement(
    g: &Graph,
    ignorant: usize,
    sources: usize,
    placement: &Placement,
    budget: &Budget,
) -> Result<SolverResult, SolverError> {
    let agents = ignorant + sources;
    if let Placement::Given(cfg) = placement {
        if cfg.ignorant_count() != ignorant || cfg.source_count() != sources {
            return Err(SolverError::InvalidState(format!(
                "configuration has {} ignorant and {} source agents",
                cfg.ignorant_count(),
                cfg.source_count()
            )));
        }
    } else if agents > g.node_count() {
        return Err(SolverError::InvalidState(format!(
            "{agents} agents do not fit on {} distinct nodes",
            g.node_count()
        )));
    }
    if ignorant == 0 {
        return Ok(SolverResult {
            winner: Winner::Agents,
            optimal_rounds: Some(0),
            states_explored: 1,
            extracted_policy: None,
            witness: Vec::new(),
            critical_state: None,
        });
    }
    let table = ValueTable::build(g, agents, sources, agents, Branching::SpanningTrees, budget)?;
    let starts = match placement {
        Placement::Given(cfg) => vec![CanonicalState::of(cfg)],
        _ => distinct_placements(g.node_count(), ignorant, sources),
    };
    let mut values = Vec::with_capacity(starts.len());
    for s in &starts {
        values.push((table.value(s)?, s));
    }
    let pick = match placement {
        Placement::AgentsChoose => values
            .iter()
            .min_by_key(|(v, _)| v.unwrap_or(INFINITE))
            .expect("at least one placement"),
        _ => values
            .iter()
            .max_by_key(|(v, _)| v.unwrap_or(INFINITE))
            .expect("at least one placement"),
    };
    let winner = if pick.0.is_some() {
        Winner::Agents
    } else {
        Winner::Adversary
    };
    Ok(SolverResult {
        winner,
        optimal_rounds: pick.0,
        states_explored: table.state_count(),
        extracted_policy: Some(match winner {
            Winner::Agents => "value_table_agents".into(),
            Winner::Adversary => "value_table_adversary".into(),
        }),
        witness: Vec::new(),
        critical_state: Some(pick.1.clone()),
    })
}

pub fn solvable(
    g: &Graph,
    k: usize,
    placement: &Placement,
    budget: &Budget,
) -> Result<bool, SolverError> {
    Ok(solve_placement(g, k, 1, placement, budget)?.agents_win())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MinAgents {
    Exactly { k: usize },
    AboveMax { k_max: usize },
    /// Budget ran out at `k`; every smaller count was decided unsolvable.
    Undecided { k: usize, reason: String },
}

impl MinAgents {
    pub fn value(&self) -> Option<usize> {
        match self {
            MinAgents::Exactly { k } => Some(*k),
            _ => None,
        }
    }
}

/// Smallest number of ignorant agents that wins (one source). Larger
/// counts are not re-solved once one wins.
pub fn min_agents(
    g: &Graph,
    k_max: usize,
    placement: &Placement,
    budget: &Budget,
) -> MinAgents {
    for k in 1..=k_max {
        if k + 1 > g.node_count() && !matches!(placement, Placement::Given(_)) {
            return MinAgents::AboveMax { k_max: k - 1 };
        }
        match solvable(g, k, placement, budget) {
            Ok(true) => return MinAgents::Exactly { k },
            Ok(false) => {}
            Err(e) => {
                return MinAgents::Undecided {
                    k,
                    reason: e.to_string(),
                }
            }
        }
    }
    MinAgents::AboveMax { k_max }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    FirstNewSource,
    AllSources,
}

/// Minimax round count until the objective, `None` if never.
pub fn game_value(
    g: &Graph,
    config: &Configuration,
    objective: Objective,
    budget: &Budget,
) -> Result<Option<u32>, SolverError> {
    let mut start = config.clone();
    start.convert();
    if start.is_solved() {
        return Ok(Some(0));
    }
    let state = CanonicalState::of(&start);
    let s = state.sources.len();
    let goal = match objective {
        Objective::FirstNewSource => s + 1,
        Objective::AllSources => state.agents(),
    };
    let table = ValueTable::build(g, state.agents(), s, goal, Branching::SpanningTrees, budget)?;
    table.value(&state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::*;

    fn st(ign: &[usize], src: &[usize]) -> CanonicalState {
        CanonicalState::new(ign.to_vec(), src.to_vec())
    }

    #[test]
    fn pack_roundtrip() {
        let s = st(&[3, 1, 1], &[11, 0]);
        assert_eq!(CanonicalState::unpack(s.pack()), s);
    }

    #[test]
    fn rings() {
        let b = Budget::default();
        let r5 = make_ring(5).unwrap();
        assert!(!agents_can_win(&r5, &st(&[2], &[0]), Branching::SpanningTrees, &b).unwrap());
        assert!(agents_can_win(&r5, &st(&[1, 3], &[0]), Branching::SpanningTrees, &b).unwrap());
        assert!(agents_can_win(&r5, &st(&[], &[0]), Branching::SpanningTrees, &b).unwrap());
    }

    #[test]
    fn small_solvability() {
        let b = Budget::default();
        let k4 = make_complete(4).unwrap();
        assert!(solvable(&k4, 2, &Placement::Adversarial, &b).unwrap());
        assert!(!solvable(&k4, 1, &Placement::Adversarial, &b).unwrap());
        let p6 = make_path(6).unwrap();
        assert!(solvable(&p6, 1, &Placement::Adversarial, &b).unwrap());
        assert_eq!(
            min_agents(&make_ring(6).unwrap(), 4, &Placement::Adversarial, &b),
            MinAgents::Exactly { k: 2 }
        );
    }

    #[test]
    fn path_timing() {
        let b = Budget::default();
        let p10 = make_path(10).unwrap();
        let c = Configuration::new(&[8, 9], &[0, 1]);
        // gap of 7 edges closes by at most 2 per round
        assert_eq!(game_value(&p10, &c, Objective::FirstNewSource, &b).unwrap(), Some(4));
        assert_eq!(game_value(&p10, &c, Objective::AllSources, &b).unwrap(), Some(4));
        let done = Configuration::new(&[3], &[]);
        assert_eq!(game_value(&p10, &done, Objective::AllSources, &b).unwrap(), Some(0));
    }

    #[test]
    fn budget_is_reported() {
        let b = Budget {
            max_nodes: 4,
            ..Budget::default()
        };
        assert!(matches!(
            solvable(&make_ring(5).unwrap(), 1, &Placement::Adversarial, &b),
            Err(SolverError::Budget(_))
        ));
    }
}
