//! Adversary for graphs of vertex connectivity at least 3 against at most
//! `δ - 2` ignorant agents: the source's node keeps a single surviving edge
//! to a free neighbor `u`, which keeps a single edge onward to a free `r`,
//! and the rest of the graph hangs off `r` through a spanning tree of
//! `G - {s, u}`.

use std::collections::VecDeque;

use crate::analysis::{min_degree, vertex_connectivity};
use crate::engine::{AdversaryPolicy, Configuration, PolicyError};
use crate::graph::{EdgeId, Graph, NodeId};

#[derive(Debug, Clone, Default)]
pub struct IsolationTree;

fn check(g: &Graph, ignorant: usize) -> Result<(), PolicyError> {
    let kappa = vertex_connectivity(g);
    if kappa < 3 {
        return Err(PolicyError::Inapplicable(format!(
            "vertex connectivity {kappa} is below 3"
        )));
    }
    let delta = min_degree(g);
    if ignorant + 2 > delta {
        return Err(PolicyError::Inapplicable(format!(
            "{ignorant} ignorant agents exceed minimum degree {delta} minus 2"
        )));
    }
    Ok(())
}

/// Kept edges for a source at `s` with the other agents on `occupied`.
pub fn isolation_edges(g: &Graph, s: NodeId, occupied: &[NodeId]) -> Result<Vec<EdgeId>, PolicyError> {
    let free = |x: NodeId| x != s && !occupied.contains(&x);
    let u = g
        .neighbors(s)
        .find(|&x| free(x))
        .ok_or_else(|| PolicyError::Precondition("source has no free neighbor".into()))?;
    let r = g
        .neighbors(u)
        .find(|&x| free(x))
        .ok_or_else(|| PolicyError::Precondition("no free node two steps from the source".into()))?;
    let mut kept = vec![
        g.edge_id(s, u).expect("adjacent"),
        g.edge_id(u, r).expect("adjacent"),
    ];
    // BFS tree of G - {s, u} from r
    let mut seen = vec![false; g.node_count()];
    seen[s] = true;
    seen[u] = true;
    seen[r] = true;
    let mut queue = VecDeque::from([r]);
    let mut reached = 3;
    while let Some(x) = queue.pop_front() {
        for &(y, e) in g.adjacency(x) {
            if !seen[y] {
                seen[y] = true;
                reached += 1;
                kept.push(e);
                queue.push_back(y);
            }
        }
    }
    if reached != g.node_count() {
        return Err(PolicyError::Precondition("removing s and u disconnects the graph".into()));
    }
    kept.sort_unstable();
    Ok(kept)
}

impl AdversaryPolicy for IsolationTree {
    fn name(&self) -> String {
        "isolation_tree".into()
    }

    fn decide(&mut self, g: &Graph, config: &Configuration) -> Result<Vec<EdgeId>, PolicyError> {
        let sources = config.source_positions();
        let &[s] = sources.as_slice() else {
            return Err(PolicyError::Precondition(format!(
                "isolation needs one source, found {}",
                sources.len()
            )));
        };
        let others = config.ignorant_positions();
        let kept = isolation_edges(g, s, &others)?;
        Ok((0..g.edge_count())
            .filter(|e| kept.binary_search(e).is_err())
            .collect())
    }

    /// Source on node 0, ignorant agents on the highest ids.
    fn place(
        &self,
        g: &Graph,
        ignorant: usize,
        sources: usize,
    ) -> Option<Result<Configuration, PolicyError>> {
        Some((|| {
            check(g, ignorant)?;
            if sources != 1 {
                return Err(PolicyError::Inapplicable("isolation places one source".into()));
            }
            let n = g.node_count();
            let ign: Vec<NodeId> = (n - ignorant..n).collect();
            Ok(Configuration::new(&[0], &ign))
        })())
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
    use crate::engine::Surviving;
    use crate::graph::*;

    #[test]
    fn source_is_isolated_by_two_hops() {
        let g = make_complete(5).unwrap();
        let mut adv = IsolationTree;
        let c = adv.place(&g, 2, 1).unwrap().unwrap();
        let removed = adv.decide(&g, &c).unwrap();
        let view = Surviving::without(&g, &removed);
        assert!(view.is_connected());
        let d = view.distances(c.position(0));
        assert!(c.ignorant_positions().iter().all(|&p| d[p] >= 3));
    }

    #[test]
    fn rejects_inapplicable_graphs() {
        let k4 = make_complete(4).unwrap();
        assert!(IsolationTree.place(&k4, 2, 1).unwrap().is_err());
        assert!(IsolationTree.place(&k4, 1, 1).unwrap().is_ok());
        assert!(IsolationTree.place(&make_ring(6).unwrap(), 1, 1).unwrap().is_err());
    }
}
