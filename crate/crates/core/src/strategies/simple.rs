//! Baseline policies: an adversary that never removes anything, one that
//! keeps a random spanning tree, and agents that walk toward each other.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::{AdversaryPolicy, AgentPolicy, Configuration, PolicyError, Surviving};
use crate::graph::{EdgeId, Graph, NodeId};

#[derive(Debug, Clone, Default)]
pub struct Passive;

impl AdversaryPolicy for Passive {
    fn name(&self) -> String {
        "passive".into()
    }

    fn decide(&mut self, _g: &Graph, _c: &Configuration) -> Result<Vec<EdgeId>, PolicyError> {
        Ok(Vec::new())
    }

    fn anonymous(&self) -> bool {
        true
    }

    fn boxed_clone(&self) -> Box<dyn AdversaryPolicy> {
        Box::new(self.clone())
    }
}

/// Keeps a uniformly random spanning tree each round (Wilson's algorithm
/// driven by a seeded ChaCha stream).
#[derive(Debug, Clone)]
pub struct RandomTree {
    seed: u64,
    rng: ChaCha8Rng,
    round: u64,
}

impl RandomTree {
    pub fn new(seed: u64) -> Self {
        RandomTree {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            round: 0,
        }
    }
}

/// Uniform spanning tree as a list of kept edge ids.
pub fn wilson_tree(g: &Graph, rng: &mut ChaCha8Rng) -> Vec<EdgeId> {
    let n = g.node_count();
    let mut in_tree = vec![false; n];
    let mut next: Vec<Option<(NodeId, EdgeId)>> = vec![None; n];
    in_tree[0] = true;
    for start in 1..n {
        let mut x = start;
        while !in_tree[x] {
            let &(y, e) = g.adjacency(x).choose(rng).expect("connected graph");
            next[x] = Some((y, e));
            x = y;
        }
        let mut x = start;
        while !in_tree[x] {
            in_tree[x] = true;
            x = next[x].expect("walk recorded").0;
        }
    }
    let mut kept: Vec<EdgeId> = (1..n).filter_map(|x| next[x].map(|(_, e)| e)).collect();
    kept.sort_unstable();
    kept
}

impl AdversaryPolicy for RandomTree {
    fn name(&self) -> String {
        format!("random_tree:seed={}", self.seed)
    }

    fn decide(&mut self, g: &Graph, _c: &Configuration) -> Result<Vec<EdgeId>, PolicyError> {
        self.round += 1;
        let kept = wilson_tree(g, &mut self.rng);
        Ok((0..g.edge_count())
            .filter(|e| kept.binary_search(e).is_err())
            .collect())
    }

    // the stream position makes every state distinct, so no false cycles
    fn memory(&self) -> String {
        self.round.to_string()
    }

    fn boxed_clone(&self) -> Box<dyn AdversaryPolicy> {
        Box::new(self.clone())
    }
}

/// Next hop from `from` toward the nearest node of `targets` (ties: lowest
/// target id, then lowest neighbor id). `None` if `targets` is empty or
/// unreachable.
pub fn step_toward(view: &Surviving<'_>, from: NodeId, targets: &[NodeId]) -> Option<NodeId> {
    let dist = view.distances(from);
    let &goal = targets
        .iter()
        .filter(|&&t| dist[t] != usize::MAX)
        .min_by_key(|&&t| (dist[t], t))?;
    if goal == from {
        return Some(from);
    }
    let back = view.distances(goal);
    view.neighbors(from).find(|&y| back[y] + 1 == back[from])
}

/// Every ignorant agent steps toward the nearest source and every source
/// toward the nearest ignorant agent. A source already adjacent to an
/// ignorant agent waits for it, so the two cannot swap past each other.
#[derive(Debug, Clone, Default)]
pub struct TowardSource;

impl AgentPolicy for TowardSource {
    fn name(&self) -> String {
        "toward_source".into()
    }

    fn decide(
        &mut self,
        view: &Surviving<'_>,
        config: &Configuration,
    ) -> Result<Vec<NodeId>, PolicyError> {
        let sources = config.source_positions();
        let ignorant = config.ignorant_positions();
        Ok(config
            .agents
            .iter()
            .map(|a| {
                if a.source {
                    let adjacent = ignorant.iter().any(|&p| view.has_edge(a.position, p));
                    if adjacent {
                        a.position
                    } else {
                        step_toward(view, a.position, &ignorant).unwrap_or(a.position)
                    }
                } else {
                    step_toward(view, a.position, &sources).unwrap_or(a.position)
                }
            })
            .collect())
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

    #[test]
    fn passive_removes_nothing() {
        let g = make_grid(3, 3).unwrap();
        let c = Configuration::new(&[0], &[8]);
        assert!(Passive.decide(&g, &c).unwrap().is_empty());
    }

    #[test]
    fn random_tree_on_ring_drops_one_edge() {
        let g = make_ring(5).unwrap();
        let c = Configuration::new(&[0], &[2]);
        let mut adv = RandomTree::new(7);
        for _ in 0..20 {
            assert_eq!(adv.decide(&g, &c).unwrap().len(), 1);
        }
    }

    #[test]
    fn random_tree_is_reproducible() {
        let g = make_grid(3, 3).unwrap();
        let c = Configuration::new(&[0], &[8]);
        let (mut a, mut b) = (RandomTree::new(3), RandomTree::new(3));
        for _ in 0..10 {
            assert_eq!(a.decide(&g, &c).unwrap(), b.decide(&g, &c).unwrap());
        }
    }

    #[test]
    fn walking_together_on_paths() {
        let p9 = make_path(9).unwrap();
        let t = simulate(
            &p9,
            &Configuration::new(&[0], &[8]),
            &mut TowardSource,
            &mut Passive,
            50,
        )
        .unwrap();
        assert_eq!(t.outcome, Outcome::Solved { round: 4 });

        let p5 = make_path(5).unwrap();
        let t = simulate(
            &p5,
            &Configuration::new(&[0], &[4]),
            &mut TowardSource,
            &mut Passive,
            50,
        )
        .unwrap();
        assert_eq!(t.outcome, Outcome::Solved { round: 2 });

        // odd gap: the source waits next to the ignorant agent
        let p4 = make_path(4).unwrap();
        let t = simulate(
            &p4,
            &Configuration::new(&[0], &[3]),
            &mut TowardSource,
            &mut Passive,
            50,
        )
        .unwrap();
        assert_eq!(t.outcome, Outcome::Solved { round: 2 });
    }
}
