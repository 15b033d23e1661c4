#![allow(dead_code)]

use broadcast_core::engine::{AgentPolicy, Configuration, PolicyError, Surviving};
use broadcast_core::graph::NodeId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Agents that stay or step to a uniformly chosen surviving neighbor.
#[derive(Clone)]
pub struct RandomWalk(ChaCha8Rng);

impl RandomWalk {
    pub fn new(seed: u64) -> Self {
        RandomWalk(ChaCha8Rng::seed_from_u64(seed))
    }
}

impl AgentPolicy for RandomWalk {
    fn name(&self) -> String {
        "random_walk".into()
    }

    fn decide(&mut self, view: &Surviving<'_>, config: &Configuration) -> Result<Vec<NodeId>, PolicyError> {
        Ok(config
            .positions()
            .into_iter()
            .map(|p| {
                let mut options: Vec<NodeId> = std::iter::once(p).chain(view.neighbors(p)).collect();
                options.sort_unstable();
                options[self.0.gen_range(0..options.len())]
            })
            .collect())
    }

    /// The stream position, so repeated positions are not mistaken for a cycle.
    fn memory(&self) -> String {
        self.0.get_word_pos().to_string()
    }

    fn boxed_clone(&self) -> Box<dyn AgentPolicy> {
        Box::new(self.clone())
    }
}
