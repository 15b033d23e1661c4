//! One simulation run described as data, so it can live in a JSON file.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{
    simulate, AdversaryPolicy, AgentPolicy, Configuration, EngineError, Outcome, PolicyError, Surviving,
    Trace,
};
use crate::graph::{FamilySpec, Graph, GraphError, NodeId};
use crate::strategies::{adversary_policy, agent_policy};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("graph: {0}")]
    Graph(#[from] GraphError),
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("policy: {0}")]
    Policy(#[from] PolicyError),
    #[error("placement: {0}")]
    Placement(String),
    #[error("{policy} does not apply to this game: {message}")]
    Mismatch { policy: String, message: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSource {
    /// Family spec such as `theta:3,3,3`.
    Family(String),
    /// Graph JSON file; relative paths resolve against the spec file.
    File(PathBuf),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimPlacement {
    /// The adversary's own placement if it has one that fits, else seeded
    /// random.
    #[default]
    Auto,
    Adversary,
    /// Distinct nodes drawn from the experiment seed.
    Random,
    Given { sources: Vec<NodeId>, ignorant: Vec<NodeId> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    Solved,
    AdversaryCycle,
    RoundLimit,
}

impl Expect {
    pub fn matches(self, outcome: &Outcome) -> bool {
        matches!(
            (self, outcome),
            (Expect::Solved, Outcome::Solved { .. })
                | (Expect::AdversaryCycle, Outcome::AdversaryCycle { .. })
                | (Expect::RoundLimit, Outcome::RoundLimit { .. })
        )
    }
}

fn one() -> usize {
    1
}

fn default_rounds() -> usize {
    500
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub graph: GraphSource,
    pub agents: String,
    pub adversary: String,
    pub k_ignorant: usize,
    #[serde(default = "one")]
    pub k_source: usize,
    #[serde(default)]
    pub placement: SimPlacement,
    #[serde(default = "default_rounds")]
    pub max_rounds: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expect>,
}

impl ExperimentSpec {
    pub fn new(family: &str, agents: &str, adversary: &str, k_ignorant: usize) -> Self {
        ExperimentSpec {
            name: None,
            graph: GraphSource::Family(family.into()),
            agents: agents.into(),
            adversary: adversary.into(),
            k_ignorant,
            k_source: 1,
            placement: SimPlacement::Auto,
            max_rounds: default_rounds(),
            seed: 0,
            trace_output: None,
            expect: None,
        }
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            let g = match &self.graph {
                GraphSource::Family(f) => f.clone(),
                GraphSource::File(p) => p.display().to_string(),
            };
            format!("{g} {} vs {} k={} seed={}", self.agents, self.adversary, self.k_ignorant, self.seed)
        })
    }

    pub fn load_graph(&self, base: Option<&Path>) -> Result<Graph, ExperimentError> {
        match &self.graph {
            GraphSource::Family(f) => Ok(f.parse::<FamilySpec>()?.build()?),
            GraphSource::File(p) => {
                let path = match base {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p.clone(),
                };
                let text = std::fs::read_to_string(&path).map_err(|e| ExperimentError::Io {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
                Ok(Graph::from_json_str(&text)?)
            }
        }
    }

    /// Adversary name with the experiment seed filled in for `random_tree`.
    fn adversary_name(&self) -> String {
        if self.adversary.trim() == "random_tree" {
            format!("random_tree:seed={}", self.seed)
        } else {
            self.adversary.clone()
        }
    }
}

fn random_placement(g: &Graph, spec: &ExperimentSpec) -> Result<Configuration, ExperimentError> {
    let total = spec.k_ignorant + spec.k_source;
    if total > g.node_count() {
        return Err(ExperimentError::Placement(format!(
            "{total} agents do not fit on {} distinct nodes",
            g.node_count()
        )));
    }
    let mut nodes: Vec<NodeId> = (0..g.node_count()).collect();
    nodes.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    Ok(Configuration::new(&nodes[..spec.k_source], &nodes[spec.k_source..total]))
}

/// Tries both policies once on clones so an inapplicable pairing is
/// reported before any round is played.
fn probe(
    g: &Graph,
    initial: &Configuration,
    agents: &dyn AgentPolicy,
    adversary: &dyn AdversaryPolicy,
) -> Result<(), ExperimentError> {
    let mismatch = |policy: String, e: PolicyError| match e {
        PolicyError::Inapplicable(message) => Err(ExperimentError::Mismatch { policy, message }),
        _ => Ok(()),
    };
    let mut start = initial.clone();
    start.convert();
    if start.is_solved() {
        return Ok(());
    }
    let removed = match adversary.boxed_clone().decide(g, &start) {
        Ok(r) => r,
        Err(e) => return mismatch(adversary.name(), e),
    };
    if removed.iter().any(|&e| e >= g.edge_count()) {
        return Ok(());
    }
    let view = Surviving::without(g, &removed);
    if !view.is_connected() {
        return Ok(());
    }
    match agents.boxed_clone().decide(&view, &start) {
        Err(e) => mismatch(agents.name(), e),
        Ok(_) => Ok(()),
    }
}

/// Builds everything, places the agents and plays the game.
pub fn run_experiment(spec: &ExperimentSpec, base: Option<&Path>) -> Result<Trace, ExperimentError> {
    let g = spec.load_graph(base)?;
    let mut agents = agent_policy(&spec.agents, spec.k_ignorant)?;
    let mut adversary = adversary_policy(&spec.adversary_name(), &g)?;
    let own = || adversary.place(&g, spec.k_ignorant, spec.k_source);
    let initial = match &spec.placement {
        SimPlacement::Auto => match own() {
            Some(Err(PolicyError::Inapplicable(_))) | None => random_placement(&g, spec)?,
            Some(c) => c?,
        },
        SimPlacement::Adversary => own().ok_or_else(|| {
            ExperimentError::Placement(format!("{} has no placement of its own", adversary.name()))
        })??,
        SimPlacement::Random => random_placement(&g, spec)?,
        SimPlacement::Given { sources, ignorant } => {
            if sources.len() != spec.k_source || ignorant.len() != spec.k_ignorant {
                return Err(ExperimentError::Placement(format!(
                    "given {} sources and {} ignorant agents, spec says {} and {}",
                    sources.len(),
                    ignorant.len(),
                    spec.k_source,
                    spec.k_ignorant
                )));
            }
            Configuration::new(sources, ignorant)
        }
    };
    initial.validate_initial(&g)?;
    probe(&g, &initial, agents.as_ref(), adversary.as_ref())?;
    Ok(simulate(&g, &initial, agents.as_mut(), adversary.as_mut(), spec.max_rounds)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_json_defaults() {
        let s: ExperimentSpec = serde_json::from_str(
            r#"{"graph": {"family": "path:9"}, "agents": "toward_source",
                "adversary": "passive", "k_ignorant": 1,
                "placement": {"given": {"sources": [0], "ignorant": [8]}}}"#,
        )
        .unwrap();
        assert_eq!(s.k_source, 1);
        assert_eq!(s.max_rounds, 500);
        let t = run_experiment(&s, None).unwrap();
        assert_eq!(t.outcome, Outcome::Solved { round: 4 });
    }

    #[test]
    fn seed_drives_random_tree_and_placement() {
        let mut s = ExperimentSpec::new("theta:4,4,4,4", "theta_broadcast", "random_tree", 4);
        s.seed = 11;
        let a = run_experiment(&s, None).unwrap();
        let b = run_experiment(&s, None).unwrap();
        assert_eq!(a.to_json_string(), b.to_json_string());
        assert_eq!(a.adversary_policy, "random_tree:seed=11");
        s.seed = 12;
        let c = run_experiment(&s, None).unwrap();
        assert_ne!(a.initial, c.initial);
    }

    #[test]
    fn auto_falls_back_when_the_adversary_cannot_place() {
        let s = ExperimentSpec::new("theta:3,3,3", "theta_broadcast", "theta_blocker", 3);
        let t = run_experiment(&s, None).unwrap();
        assert!(matches!(t.outcome, Outcome::Solved { .. }));
        let mut s = s;
        s.placement = SimPlacement::Adversary;
        assert!(run_experiment(&s, None).is_err());
    }

    #[test]
    fn mismatched_policy_fails_before_play() {
        let s = ExperimentSpec::new("grid:3x3", "theta_broadcast", "passive", 2);
        assert!(matches!(run_experiment(&s, None), Err(ExperimentError::Mismatch { .. })));
    }
}
