//! Agent policies for cliques and lollipops, read off exact value tables.
//!
//! Tables are built lazily, one per (clique size, agent count), and shared
//! between clones.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::engine::{AgentPolicy, Configuration, PolicyError, Surviving};
use crate::graph::{make_complete, Graph, NodeId};
use crate::solver::best_table_move;
use crate::solver::{Branching, Budget, ValueTable};

pub const DEFAULT_CLIQUE_NODES: usize = 6;

#[derive(Clone)]
pub struct CliquePolicy {
    max_nodes: usize,
    tables: Arc<Mutex<HashMap<(usize, usize), Arc<ValueTable>>>>,
}

impl Default for CliquePolicy {
    fn default() -> Self {
        CliquePolicy::new(DEFAULT_CLIQUE_NODES)
    }
}

impl CliquePolicy {
    pub fn new(max_nodes: usize) -> Self {
        CliquePolicy {
            max_nodes,
            tables: Arc::default(),
        }
    }

    fn table(&mut self, n: usize, agents: usize) -> Result<Arc<ValueTable>, PolicyError> {
        if n > self.max_nodes {
            return Err(PolicyError::Inapplicable(format!(
                "clique of {n} nodes exceeds the table limit of {}",
                self.max_nodes
            )));
        }
        let mut tables = self.tables.lock().expect("table cache");
        if let Some(t) = tables.get(&(n, agents)) {
            return Ok(t.clone());
        }
        let k = make_complete(n).map_err(|e| PolicyError::Inapplicable(e.to_string()))?;
        let budget = Budget {
            max_nodes: n,
            max_agents: agents,
            ..Budget::default()
        };
        let t = ValueTable::build(&k, agents, 1, agents, Branching::SpanningTrees, &budget)
            .map_err(|e| PolicyError::Inapplicable(e.to_string()))?;
        let t = Arc::new(t);
        tables.insert((n, agents), t.clone());
        Ok(t)
    }

    /// Move on a complete graph `K_n` given as a surviving view of it.
    fn clique_move(&mut self, view: &Surviving<'_>, config: &Configuration) -> Result<Vec<NodeId>, PolicyError> {
        let n = view.graph().node_count();
        if config.len() + 1 < n {
            return Err(PolicyError::Precondition(format!(
                "K_{n} needs at least {} agents, found {}",
                n - 1,
                config.len()
            )));
        }
        let table = self.table(n, config.len())?;
        best_table_move(&table, view, config)
    }
}

fn is_complete(g: &Graph) -> bool {
    let n = g.node_count();
    g.edge_count() == n * (n - 1) / 2
}

impl AgentPolicy for CliquePolicy {
    fn name(&self) -> String {
        "clique".into()
    }

    fn decide(&mut self, view: &Surviving<'_>, config: &Configuration) -> Result<Vec<NodeId>, PolicyError> {
        if !is_complete(view.graph()) {
            return Err(PolicyError::Inapplicable("clique policy needs a complete graph".into()));
        }
        self.clique_move(view, config)
    }

    fn anonymous(&self) -> bool {
        true
    }

    fn boxed_clone(&self) -> Box<dyn AgentPolicy> {
        Box::new(self.clone())
    }
}

/// Lollipop agents walk along the path into the clique, then play the
/// clique table. Path edges are bridges, so the walk is never blocked.
#[derive(Clone, Default)]
pub struct LollipopPolicy {
    clique: CliquePolicy,
}

impl LollipopPolicy {
    pub fn new(max_nodes: usize) -> Self {
        LollipopPolicy {
            clique: CliquePolicy::new(max_nodes),
        }
    }
}

/// Clique nodes and junction of a lollipop graph.
fn lollipop_parts(g: &Graph) -> Result<(Vec<NodeId>, NodeId), PolicyError> {
    match (g.label("clique"), g.label("junction")) {
        (Some(c), Some(&[j])) => Ok((c.to_vec(), j)),
        _ => Err(PolicyError::Inapplicable("lollipop policy needs a labelled lollipop".into())),
    }
}

impl AgentPolicy for LollipopPolicy {
    fn name(&self) -> String {
        "lollipop".into()
    }

    fn decide(&mut self, view: &Surviving<'_>, config: &Configuration) -> Result<Vec<NodeId>, PolicyError> {
        let g = view.graph();
        let (clique, junction) = lollipop_parts(g)?;
        // clique nodes are 0..clique.len() in the lollipop numbering
        if clique.iter().enumerate().any(|(i, &x)| i != x) {
            return Err(PolicyError::Inapplicable("lollipop clique must be nodes 0..k+2".into()));
        }
        let in_clique = |x: NodeId| x < clique.len();
        let mut moves = config.positions();
        if moves.iter().any(|&x| !in_clique(x)) {
            let d = view.distances(junction);
            for m in moves.iter_mut().filter(|x| !in_clique(**x)) {
                *m = view
                    .neighbors(*m)
                    .find(|&y| d[y] + 1 == d[*m])
                    .ok_or_else(|| PolicyError::Precondition("path edge missing".into()))?;
            }
            return Ok(moves);
        }
        let k = make_complete(clique.len()).map_err(|e| PolicyError::Inapplicable(e.to_string()))?;
        let removed: Vec<usize> = (0..k.edge_count())
            .filter(|&e| {
                let edge = k.edge(e);
                !view.has_edge(edge.u(), edge.v())
            })
            .collect();
        let inner = Surviving::without(&k, &removed);
        self.clique.clique_move(&inner, config)
    }

    fn anonymous(&self) -> bool {
        true
    }

    fn boxed_clone(&self) -> Box<dyn AgentPolicy> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{simulate, Outcome};
    use crate::graph::*;
    use crate::strategies::{Passive, RandomTree};

    #[test]
    fn triangle_in_one_round() {
        let g = make_complete(3).unwrap();
        let c = Configuration::new(&[0], &[1]);
        let t = simulate(&g, &c, &mut CliquePolicy::default(), &mut RandomTree::new(3), 10).unwrap();
        assert_eq!(t.outcome, Outcome::Solved { round: 1 });
    }

    #[test]
    fn lollipop_agents_reach_the_clique() {
        let g = make_lollipop(2, 3).unwrap();
        let c = Configuration::new(&[5], &[6]);
        let t = simulate(&g, &c, &mut LollipopPolicy::default(), &mut Passive, 20).unwrap();
        let configs = t.configurations();
        assert!(configs[3].positions().iter().all(|&x| x < 4));
        assert!(matches!(t.outcome, Outcome::Solved { .. }));
    }

    #[test]
    fn rejects_large_cliques() {
        let g = make_complete(7).unwrap();
        let c = Configuration::new(&[0], &[1, 2, 3, 4, 5]);
        let mut p = CliquePolicy::default();
        assert!(p.decide(&Surviving::full(&g), &c).is_err());
    }
}
