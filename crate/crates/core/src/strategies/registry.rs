//! Policies by name, as used on the command line: `name` or `name:param`,
//! e.g. `random_tree:seed=7`, `grid_flipflop:3x3`, `clique:max_nodes=5`.

use crate::engine::{AdversaryPolicy, AgentPolicy, PolicyError};
use crate::graph::Graph;

use super::*;

pub const AGENT_POLICIES: &[&str] = &["toward_source", "greedy_path", "theta_broadcast", "clique", "lollipop"];
pub const ADVERSARY_POLICIES: &[&str] = &[
    "passive",
    "random_tree",
    "theta_blocker",
    "bond_blocker",
    "isolation_tree",
    "grid_flipflop",
];

fn split(spec: &str) -> (&str, Option<&str>) {
    match spec.split_once(':') {
        Some((n, p)) => (n.trim(), Some(p.trim())),
        None => (spec.trim(), None),
    }
}

/// Value of `key=value`; a bare value is accepted too.
fn keyed<T: std::str::FromStr>(param: &str, key: &str) -> Result<T, PolicyError> {
    let raw = param
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .unwrap_or(param);
    raw.parse()
        .map_err(|_| PolicyError::Inapplicable(format!("bad {key} parameter `{param}`")))
}

fn no_param(name: &str, param: Option<&str>) -> Result<(), PolicyError> {
    match param {
        Some(p) => Err(PolicyError::Inapplicable(format!("{name} takes no parameter, got `{p}`"))),
        None => Ok(()),
    }
}

/// Agent policy for `k` ignorant agents.
pub fn agent_policy(spec: &str, k: usize) -> Result<Box<dyn AgentPolicy>, PolicyError> {
    let (name, param) = split(spec);
    Ok(match name {
        "toward_source" => {
            no_param(name, param)?;
            Box::new(TowardSource)
        }
        "greedy_path" => {
            no_param(name, param)?;
            Box::new(GreedyPath)
        }
        "theta_broadcast" => {
            no_param(name, param)?;
            Box::new(ThetaBroadcast::new(k))
        }
        "clique" => match param {
            Some(p) => Box::new(CliquePolicy::new(keyed(p, "max_nodes")?)),
            None => Box::new(CliquePolicy::default()),
        },
        "lollipop" => match param {
            Some(p) => Box::new(LollipopPolicy::new(keyed(p, "max_nodes")?)),
            None => Box::new(LollipopPolicy::default()),
        },
        other => {
            return Err(PolicyError::Inapplicable(format!(
                "unknown agent policy `{other}` (known: {})",
                AGENT_POLICIES.join(", ")
            )))
        }
    })
}

/// Adversary policy for graph `g`.
pub fn adversary_policy(spec: &str, g: &Graph) -> Result<Box<dyn AdversaryPolicy>, PolicyError> {
    let (name, param) = split(spec);
    Ok(match name {
        "passive" => {
            no_param(name, param)?;
            Box::new(Passive)
        }
        "random_tree" => Box::new(RandomTree::new(match param {
            Some(p) => keyed(p, "seed")?,
            None => 0,
        })),
        "theta_blocker" => {
            no_param(name, param)?;
            Box::new(ThetaBlocker)
        }
        "bond_blocker" => {
            no_param(name, param)?;
            Box::new(BondBlocker::largest(g)?)
        }
        "isolation_tree" => {
            no_param(name, param)?;
            Box::new(IsolationTree)
        }
        "grid_flipflop" => {
            let (rows, cols) = match param {
                Some(p) => {
                    let (r, c) = p
                        .split_once('x')
                        .ok_or_else(|| PolicyError::Inapplicable(format!("bad grid size `{p}`")))?;
                    (keyed(r, "rows")?, keyed(c, "cols")?)
                }
                None => g
                    .grid_dims()
                    .ok_or_else(|| PolicyError::Inapplicable("grid_flipflop needs a grid size".into()))?,
            };
            Box::new(GridFlipflop::new(rows, cols)?)
        }
        other => {
            return Err(PolicyError::Inapplicable(format!(
                "unknown adversary policy `{other}` (known: {})",
                ADVERSARY_POLICIES.join(", ")
            )))
        }
    })
}
