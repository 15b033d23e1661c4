//! Greedy path agents: pick the ignorant agent whose shortest path to the
//! source carries the most ignorant agents and advance along that path.

use crate::engine::{AgentPolicy, Configuration, PolicyError, Surviving};
use crate::graph::NodeId;

#[derive(Debug, Clone, Default)]
pub struct GreedyPath;

/// One greedy round. Shortest paths are the lexicographically smallest
/// ones (lowest-id next hop at every step). Ties between agents go to the
/// lowest node id, then to the smaller path.
pub fn greedy_moves(view: &Surviving<'_>, config: &Configuration) -> Result<Vec<NodeId>, PolicyError> {
    let sources: Vec<usize> = config.source_ids().collect();
    let source = match sources.as_slice() {
        [s] => *s,
        [] => return Err(PolicyError::Precondition("greedy path needs a source agent".into())),
        _ => {
            return Err(PolicyError::Precondition(format!(
                "greedy path needs exactly one source agent, found {}",
                sources.len()
            )))
        }
    };
    let s = config.position(source);
    let ignorant = config.ignorant_positions();
    let mut moves = config.positions();
    if ignorant.is_empty() {
        return Ok(moves);
    }
    let mut best: Option<(usize, NodeId, Vec<NodeId>)> = None;
    for &p in &ignorant {
        let path = view
            .shortest_path(p, s)
            .ok_or_else(|| PolicyError::Precondition("surviving graph is disconnected".into()))?;
        let carried = ignorant.iter().filter(|q| path.contains(q)).count();
        let better = match &best {
            None => true,
            Some((c, node, bp)) => {
                carried > *c || (carried == *c && (p < *node || (p == *node && path < *bp)))
            }
        };
        if better {
            best = Some((carried, p, path));
        }
    }
    let (_, _, path) = best.expect("at least one ignorant agent");
    let last = path.len() - 1;
    for i in config.ignorant_ids() {
        if let Some(at) = path[..last].iter().position(|&x| x == config.position(i)) {
            moves[i] = path[at + 1];
        }
    }
    moves[source] = path[last - 1];
    Ok(moves)
}

impl AgentPolicy for GreedyPath {
    fn name(&self) -> String {
        "greedy_path".into()
    }

    fn decide(
        &mut self,
        view: &Surviving<'_>,
        config: &Configuration,
    ) -> Result<Vec<NodeId>, PolicyError> {
        greedy_moves(view, config)
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
    use crate::graph::*;

    #[test]
    fn carries_both_agents_on_a_path() {
        let g = make_path(5).unwrap();
        let c = Configuration::new(&[0], &[2, 4]);
        let m = greedy_moves(&Surviving::full(&g), &c).unwrap();
        assert_eq!(m, vec![1, 1, 3]);
    }

    #[test]
    fn single_agent_walks_its_path() {
        let g = make_grid(3, 3).unwrap();
        let c = Configuration::new(&[0], &[8]);
        let m = greedy_moves(&Surviving::full(&g), &c).unwrap();
        // 8 -> 5 -> 2 -> 1 -> 0 is lexicographically smallest from 8
        assert_eq!(m, vec![1, 5]);
    }

    #[test]
    fn needs_exactly_one_source() {
        let g = make_path(4).unwrap();
        let view = Surviving::full(&g);
        assert!(greedy_moves(&view, &Configuration::new(&[], &[1])).is_err());
        assert!(greedy_moves(&view, &Configuration::new(&[0, 3], &[1])).is_err());
    }
}
