//! Model checking a fixed policy against an exhaustive opponent.

use std::collections::VecDeque;

use rustc_hash::FxHashMap;
use serde::Serialize;

use super::choices::{self, EdgeMask};
use super::{Budget, SolverError, SolverResult, Winner};
use crate::engine::{AdversaryPolicy, AgentPolicy, Configuration, Surviving};
use crate::graph::{Edge, EdgeId, Graph, NodeId};

/// One round of a witness play: the removal, then the configuration after
/// moves and conversions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessStep {
    pub removed: Vec<Edge>,
    pub configuration: Configuration,
}

type Key = (Vec<(NodeId, bool)>, String);

fn config_key(c: &Configuration, anonymous: bool) -> Vec<(NodeId, bool)> {
    let mut v: Vec<(NodeId, bool)> = c.agents.iter().map(|a| (a.position, a.source)).collect();
    if anonymous {
        v.sort_unstable();
    }
    v
}

/// Sources first, each class sorted by position.
fn canonical(c: &Configuration) -> Configuration {
    Configuration::new(&c.source_positions(), &c.ignorant_positions())
}

fn removed_edges(g: &Graph, removed: &[EdgeId]) -> Vec<Edge> {
    removed.iter().map(|&e| g.edge(e)).collect()
}

/// Every joint move in `view`, deduplicated by resulting configuration key.
fn joint_moves(view: &Surviving<'_>, c: &Configuration, anonymous: bool) -> Vec<Configuration> {
    let options: Vec<Vec<NodeId>> = c
        .agents
        .iter()
        .map(|a| {
            std::iter::once(a.position)
                .chain(view.neighbors(a.position))
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut seen = rustc_hash::FxHashSet::default();
    let mut idx = vec![0usize; options.len()];
    loop {
        let mut next = c.clone();
        for (a, (o, &i)) in next.agents.iter_mut().zip(options.iter().zip(&idx)) {
            a.position = o[i];
        }
        next.convert();
        if anonymous {
            next = canonical(&next);
        }
        if seen.insert(config_key(&next, anonymous)) {
            out.push(next);
        }
        let mut j = 0;
        while j < idx.len() {
            idx[j] += 1;
            if idx[j] < options[j].len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == idx.len() {
            break;
        }
    }
    out
}

/// Fixed adversary against optimal agents. The adversary is deterministic,
/// so the agents win iff a solved configuration is reachable from every
/// initial configuration; the shortest such play is returned as witness.
pub fn check_adversary(
    g: &Graph,
    initials: &[Configuration],
    adversary: &dyn AdversaryPolicy,
    budget: &Budget,
) -> Result<SolverResult, SolverError> {
    let anonymous = adversary.anonymous();
    let mut explored = 0;
    let mut worst: Option<u32> = Some(0);
    let mut witness = Vec::new();
    for init in initials {
        let mut start = init.clone();
        start.convert();
        if anonymous {
            start = canonical(&start);
        }
        // node: configuration, adversary state, parent, step into it
        let mut nodes: Vec<(Configuration, Box<dyn AdversaryPolicy>, usize, Vec<Edge>)> =
            vec![(start.clone(), adversary.boxed_clone(), usize::MAX, Vec::new())];
        let mut depth = vec![0u32];
        let mut seen: FxHashMap<Key, ()> = FxHashMap::default();
        seen.insert((config_key(&start, anonymous), adversary.memory()), ());
        let mut queue = VecDeque::from([0usize]);
        let mut found = None;
        while let Some(i) = queue.pop_front() {
            if nodes[i].0.is_solved() {
                found = Some(i);
                break;
            }
            let mut adv = nodes[i].1.boxed_clone();
            let cfg = nodes[i].0.clone();
            let mut removed = adv
                .decide(g, &cfg)
                .map_err(|e| SolverError::Policy(format!("{}: {e}", adv.name())))?;
            removed.sort_unstable();
            removed.dedup();
            let view = Surviving::without(g, &removed);
            if !view.is_connected() {
                return Err(SolverError::Policy(format!(
                    "{} disconnected the graph from {:?}",
                    adv.name(),
                    cfg.positions()
                )));
            }
            let mem = adv.memory();
            for next in joint_moves(&view, &cfg, anonymous) {
                let key = (config_key(&next, anonymous), mem.clone());
                if seen.contains_key(&key) {
                    continue;
                }
                seen.insert(key, ());
                if nodes.len() >= budget.max_states {
                    return Err(SolverError::Budget(format!(
                        "more than {} model-checking states",
                        budget.max_states
                    )));
                }
                nodes.push((next, adv.boxed_clone(), i, removed_edges(g, &removed)));
                depth.push(depth[i] + 1);
                queue.push_back(nodes.len() - 1);
            }
        }
        explored += nodes.len();
        match found {
            Some(i) => {
                if worst.is_some_and(|w| depth[i] >= w) {
                    worst = Some(depth[i]);
                    let mut path = Vec::new();
                    let mut j = i;
                    while nodes[j].2 != usize::MAX {
                        path.push(WitnessStep {
                            removed: nodes[j].3.clone(),
                            configuration: nodes[j].0.clone(),
                        });
                        j = nodes[j].2;
                    }
                    path.reverse();
                    witness = path;
                }
            }
            None => {
                return Ok(SolverResult {
                    winner: Winner::Adversary,
                    optimal_rounds: None,
                    states_explored: explored,
                    extracted_policy: Some(adversary.name()),
                    witness: Vec::new(),
                    critical_state: Some(super::CanonicalState::of(init)),
                });
            }
        }
    }
    Ok(SolverResult {
        winner: Winner::Agents,
        optimal_rounds: worst,
        states_explored: explored,
        extracted_policy: None,
        witness,
        critical_state: None,
    })
}

enum Succ {
    Goal,
    Next(Vec<(usize, EdgeMask)>),
    Failed(String),
}

/// Fixed agent policy against an adversary choosing any connectivity-
/// preserving removal. The agents win iff every play reaches a solved
/// configuration; otherwise the witness is a play ending in a repeated
/// state or in a policy failure.
pub fn check_agents(
    g: &Graph,
    initials: &[Configuration],
    agents: &dyn AgentPolicy,
    budget: &Budget,
) -> Result<SolverResult, SolverError> {
    let options = choices::connected_subsets(g, budget.max_choices).ok_or_else(|| {
        SolverError::Budget(format!("more than {} adversary options", budget.max_choices))
    })?;
    let full = choices::full_mask(g);
    let anonymous = agents.anonymous();
    let mut index: FxHashMap<Key, usize> = FxHashMap::default();
    let mut nodes: Vec<(Configuration, Box<dyn AgentPolicy>)> = Vec::new();
    let mut starts = Vec::new();
    for init in initials {
        let mut c = init.clone();
        c.convert();
        let key = (config_key(&c, anonymous), agents.memory());
        let id = *index.entry(key).or_insert_with(|| {
            nodes.push((c, agents.boxed_clone()));
            nodes.len() - 1
        });
        starts.push(id);
    }
    let mut succ: Vec<Succ> = Vec::new();
    let mut i = 0;
    while i < nodes.len() {
        let cfg = nodes[i].0.clone();
        if cfg.is_solved() {
            succ.push(Succ::Goal);
            i += 1;
            continue;
        }
        let mut out = Vec::new();
        let mut failure = None;
        for &mask in &options {
            let removed: Vec<EdgeId> = (0..g.edge_count()).filter(|&e| mask >> e & 1 == 0).collect();
            let view = Surviving::without(g, &removed);
            let mut pol = nodes[i].1.boxed_clone();
            let moves = match pol.decide(&view, &cfg) {
                Ok(m) => m,
                Err(e) => {
                    failure = Some(format!("{}: {e}", pol.name()));
                    break;
                }
            };
            let legal = moves.len() == cfg.len()
                && cfg
                    .agents
                    .iter()
                    .zip(&moves)
                    .all(|(a, &to)| to < g.node_count() && view.can_move(a.position, to));
            if !legal {
                failure = Some(format!("{} made an illegal move {moves:?}", pol.name()));
                break;
            }
            let mut next = cfg.clone();
            for (a, &to) in next.agents.iter_mut().zip(&moves) {
                a.position = to;
            }
            next.convert();
            let key = (config_key(&next, anonymous), pol.memory());
            let id = match index.get(&key) {
                Some(&id) => id,
                None => {
                    if nodes.len() >= budget.max_states {
                        return Err(SolverError::Budget(format!(
                            "more than {} model-checking states",
                            budget.max_states
                        )));
                    }
                    nodes.push((next, pol));
                    index.insert(key, nodes.len() - 1);
                    nodes.len() - 1
                }
            };
            out.push((id, mask));
        }
        succ.push(match failure {
            Some(msg) => Succ::Failed(msg),
            None => {
                out.sort_unstable_by_key(|&(id, _)| id);
                out.dedup_by_key(|&mut (id, _)| id);
                Succ::Next(out)
            }
        });
        i += 1;
    }

    // backward attractor: a state is won once all its successors are
    let n = nodes.len();
    let mut rank = vec![u32::MAX; n];
    let mut pending = vec![0usize; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut queue = VecDeque::new();
    for (i, s) in succ.iter().enumerate() {
        match s {
            Succ::Goal => {
                rank[i] = 0;
                queue.push_back(i);
            }
            Succ::Next(v) => {
                pending[i] = v.len();
                for &(j, _) in v {
                    preds[j].push(i);
                }
            }
            Succ::Failed(_) => pending[i] = usize::MAX,
        }
    }
    while let Some(j) = queue.pop_front() {
        for &p in &preds[j] {
            if pending[p] == usize::MAX || rank[p] != u32::MAX {
                continue;
            }
            pending[p] -= 1;
            if pending[p] == 0 {
                let Succ::Next(v) = &succ[p] else { unreachable!() };
                rank[p] = 1 + v.iter().map(|&(k, _)| rank[k]).max().unwrap_or(0);
                queue.push_back(p);
            }
        }
    }

    let to_step = |mask: EdgeMask, id: usize| WitnessStep {
        removed: (0..g.edge_count())
            .filter(|&e| (mask & full) >> e & 1 == 0)
            .map(|e| g.edge(e))
            .collect(),
        configuration: nodes[id].0.clone(),
    };
    if let Some(&lost) = starts.iter().find(|&&s| rank[s] == u32::MAX) {
        let mut witness = Vec::new();
        let mut on_path = vec![false; n];
        let mut cur = lost;
        loop {
            on_path[cur] = true;
            match &succ[cur] {
                Succ::Failed(msg) => {
                    witness.push(WitnessStep {
                        removed: Vec::new(),
                        configuration: nodes[cur].0.clone(),
                    });
                    return Ok(SolverResult {
                        winner: Winner::Adversary,
                        optimal_rounds: None,
                        states_explored: n,
                        extracted_policy: Some(format!("policy failure: {msg}")),
                        witness,
                        critical_state: Some(super::CanonicalState::of(&nodes[lost].0)),
                    });
                }
                Succ::Next(v) => {
                    let &(next, mask) = v
                        .iter()
                        .find(|&&(k, _)| rank[k] == u32::MAX)
                        .expect("an unwon state has an unwon successor");
                    witness.push(to_step(mask, next));
                    if on_path[next] {
                        break;
                    }
                    cur = next;
                }
                Succ::Goal => unreachable!("goal states are won"),
            }
        }
        return Ok(SolverResult {
            winner: Winner::Adversary,
            optimal_rounds: None,
            states_explored: n,
            extracted_policy: Some("adversary_cycle".into()),
            witness,
            critical_state: Some(super::CanonicalState::of(&nodes[lost].0)),
        });
    }
    let worst = starts.iter().copied().max_by_key(|&s| rank[s]).unwrap_or(0);
    let mut witness = Vec::new();
    let mut cur = worst;
    while let Succ::Next(v) = &succ[cur] {
        let &(next, mask) = v.iter().max_by_key(|&&(k, _)| rank[k]).expect("nonempty");
        witness.push(to_step(mask, next));
        cur = next;
    }
    Ok(SolverResult {
        winner: Winner::Agents,
        optimal_rounds: starts.iter().map(|&s| rank[s]).max(),
        states_explored: n,
        extracted_policy: Some(agents.name()),
        witness,
        critical_state: None,
    })
}
