//! Adversary built on a matching bond: ignorant agents start on one side,
//! sources on the other, and every bond edge touched by an agent is removed.
//! With fewer agents than bond edges some bond edge always survives.

use crate::analysis::{enumerate_bonds, Bond};
use crate::engine::{AdversaryPolicy, Configuration, PolicyError};
use crate::graph::{EdgeId, Graph, NodeId};

#[derive(Debug, Clone)]
pub struct BondBlocker {
    bond: Bond,
    // (edge id, endpoint on side A, endpoint on side B)
    edges: Vec<(EdgeId, NodeId, NodeId)>,
}

impl BondBlocker {
    pub fn new(g: &Graph, bond: Bond) -> Result<Self, PolicyError> {
        if !bond.is_matching {
            return Err(PolicyError::Inapplicable("bond is not a matching".into()));
        }
        let edges = (0..bond.size())
            .map(|i| {
                let (a, b) = bond.endpoints(i);
                g.edge_id(a, b)
                    .map(|e| (e, a, b))
                    .ok_or_else(|| PolicyError::Inapplicable(format!("bond edge {a}-{b} not in graph")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BondBlocker { bond, edges })
    }

    /// Uses the largest matching bond (ties: first in enumeration order).
    pub fn largest(g: &Graph) -> Result<Self, PolicyError> {
        let bonds = enumerate_bonds(g, g.edge_count())
            .map_err(|e| PolicyError::Inapplicable(e.to_string()))?;
        let bond = bonds
            .into_iter()
            .filter(|b| b.is_matching)
            .fold(None::<Bond>, |best, b| match best {
                Some(x) if x.size() >= b.size() => Some(x),
                _ => Some(b),
            })
            .ok_or_else(|| PolicyError::Inapplicable("graph has no matching bond".into()))?;
        BondBlocker::new(g, bond)
    }

    pub fn bond(&self) -> &Bond {
        &self.bond
    }

    /// Which side (A = true) a node lies on.
    pub fn on_side_a(&self, x: NodeId) -> bool {
        self.bond.side_a.binary_search(&x).is_ok()
    }
}

impl AdversaryPolicy for BondBlocker {
    fn name(&self) -> String {
        "bond_blocker".into()
    }

    fn decide(&mut self, _g: &Graph, config: &Configuration) -> Result<Vec<EdgeId>, PolicyError> {
        if config.len() >= self.edges.len() {
            return Err(PolicyError::Inapplicable(format!(
                "{} agents need a bond of more than {} edges",
                config.len(),
                self.edges.len()
            )));
        }
        let occupied = config.positions();
        let mut out: Vec<EdgeId> = self
            .edges
            .iter()
            .filter(|(_, a, b)| occupied.contains(a) || occupied.contains(b))
            .map(|&(e, _, _)| e)
            .collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Ignorant agents on the lowest ids of side A, sources on the lowest
    /// ids of side B.
    fn place(
        &self,
        _g: &Graph,
        ignorant: usize,
        sources: usize,
    ) -> Option<Result<Configuration, PolicyError>> {
        let m = self.edges.len();
        if ignorant + sources + 1 > m {
            return Some(Err(PolicyError::Inapplicable(format!(
                "{} agents need a bond of more than {m} edges",
                ignorant + sources
            ))));
        }
        if ignorant > self.bond.side_a.len() || sources > self.bond.side_b.len() {
            return Some(Err(PolicyError::Inapplicable("bond side too small".into())));
        }
        Some(Ok(Configuration::new(
            &self.bond.side_b[..sources],
            &self.bond.side_a[..ignorant],
        )))
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
    use crate::graph::*;

    #[test]
    fn theta_middle_bond() {
        let g = make_theta(&[3, 3, 3]).unwrap();
        let b = BondBlocker::largest(&g).unwrap();
        assert_eq!(b.bond().size(), 3);
        let c = b.place(&g, 1, 1).unwrap().unwrap();
        assert!(b.on_side_a(c.position(1)) && !b.on_side_a(c.position(0)));
        assert!(b.place(&g, 2, 1).unwrap().is_err());
    }

    #[test]
    fn idle_bond_removes_nothing() {
        let g = make_theta(&[3, 3, 3]).unwrap();
        let t = g.theta_layout().unwrap();
        let mut v: Vec<Edge> = (0..3).map(|i| t.path_edge(i, 2)).collect();
        v.sort();
        let bonds = crate::analysis::enumerate_bonds(&g, 3).unwrap();
        let bond = bonds.into_iter().find(|b| b.edges == v).unwrap();
        let mut b = BondBlocker::new(&g, bond).unwrap();
        // agents on the poles touch no bond edge
        let c = Configuration::new(&[t.north], &[t.south]);
        assert!(b.decide(&g, &c).unwrap().is_empty());
    }
}
