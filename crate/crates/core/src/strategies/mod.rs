//! Agent and adversary policies.

pub mod bond_blocker;
pub mod clique;
pub mod greedy;
pub mod grid_flipflop;
pub mod isolation_tree;
pub mod registry;
pub mod simple;
pub mod theta_blocker;
pub mod theta_broadcast;

pub use bond_blocker::BondBlocker;
pub use clique::{CliquePolicy, LollipopPolicy};
pub use greedy::GreedyPath;
pub use grid_flipflop::GridFlipflop;
pub use isolation_tree::IsolationTree;
pub use registry::{adversary_policy, agent_policy};
pub use simple::{Passive, RandomTree, TowardSource};
pub use theta_blocker::ThetaBlocker;
pub use theta_broadcast::ThetaBroadcast;
