//! Policies read off a solved [`ValueTable`].

use std::sync::Arc;

use super::{CanonicalState, ValueTable, INFINITE};
use crate::engine::{AdversaryPolicy, AgentPolicy, Configuration, PolicyError, Surviving};
use crate::graph::{EdgeId, Graph, NodeId};

/// Agents follow the value table: under any surviving graph they pick a
/// spanning tree inside it and the joint move of least successor value.
#[derive(Clone)]
pub struct TablePolicy {
    table: Arc<ValueTable>,
}

impl TablePolicy {
    pub fn new(table: Arc<ValueTable>) -> Self {
        TablePolicy { table }
    }

    pub fn table(&self) -> &ValueTable {
        &self.table
    }
}

/// Agent ids in the table's agent order: sources by position, then ignorant
/// by position, ties by id.
fn table_order(config: &Configuration) -> Vec<usize> {
    let mut src: Vec<usize> = config.source_ids().collect();
    let mut ign: Vec<usize> = config.ignorant_ids().collect();
    src.sort_by_key(|&i| (config.position(i), i));
    ign.sort_by_key(|&i| (config.position(i), i));
    src.extend(ign);
    src
}

pub(crate) fn best_table_move(
    table: &ValueTable,
    view: &Surviving<'_>,
    config: &Configuration,
) -> Result<Vec<NodeId>, PolicyError> {
    let state = CanonicalState::of(config);
    let key = table
        .key_of(&state)
        .map_err(|e| PolicyError::Inapplicable(e.to_string()))?;
    // the table is keyed on the converted state; the engine converts at
    // the end of every round so the configuration already is
    let alive: u64 = (0..table.graph.edge_count())
        .filter(|&e| view.is_alive(e))
        .fold(0, |m, e| m | 1 << e);
    let mut best: Option<(u32, Vec<u8>)> = None;
    for c in 0..table.choices.len() {
        if table.choices[c] & !alive != 0 {
            continue;
        }
        table.any_successor(key, c, &mut |succ, dest| {
            let v = table.value_of(succ);
            if best.as_ref().map_or(true, |(b, _)| v < *b) {
                best = Some((v, dest.to_vec()));
            }
            v == 0
        });
        if best.as_ref().is_some_and(|(v, _)| *v == 0) {
            break;
        }
    }
    let (_, dest) = best.ok_or_else(|| {
        PolicyError::Precondition("surviving graph contains no spanning tree of the table".into())
    })?;
    let mut moves = config.positions();
    for (slot, id) in table_order(config).into_iter().enumerate() {
        moves[id] = dest[slot] as NodeId;
    }
    Ok(moves)
}

impl AgentPolicy for TablePolicy {
    fn name(&self) -> String {
        "value_table".into()
    }

    fn decide(
        &mut self,
        view: &Surviving<'_>,
        config: &Configuration,
    ) -> Result<Vec<NodeId>, PolicyError> {
        best_table_move(&self.table, view, config)
    }

    fn anonymous(&self) -> bool {
        true
    }

    fn boxed_clone(&self) -> Box<dyn AgentPolicy> {
        Box::new(self.clone())
    }
}

/// Adversary reading the same table: from a losing state it keeps a
/// spanning tree that refutes every joint move; otherwise it keeps the tree
/// that delays the agents longest.
#[derive(Clone)]
pub struct TableAdversary {
    table: Arc<ValueTable>,
}

impl TableAdversary {
    pub fn new(table: Arc<ValueTable>) -> Self {
        TableAdversary { table }
    }
}

impl AdversaryPolicy for TableAdversary {
    fn name(&self) -> String {
        "value_table".into()
    }

    fn decide(&mut self, g: &Graph, config: &Configuration) -> Result<Vec<EdgeId>, PolicyError> {
        let t = &self.table;
        let key = t
            .key_of(&CanonicalState::of(config))
            .map_err(|e| PolicyError::Inapplicable(e.to_string()))?;
        let mut best = (0u32, 0usize);
        for c in 0..t.choices.len() {
            let mut least = INFINITE;
            t.any_successor(key, c, &mut |succ, _| {
                least = least.min(t.value_of(succ));
                least <= best.0 && c > 0
            });
            if c == 0 || least > best.0 {
                best = (least, c);
            }
            if least == INFINITE {
                break;
            }
        }
        let keep = t.choices[best.1];
        Ok((0..g.edge_count()).filter(|&e| keep >> e & 1 == 0).collect())
    }

    fn anonymous(&self) -> bool {
        true
    }

    fn boxed_clone(&self) -> Box<dyn AdversaryPolicy> {
        Box::new(self.clone())
    }
}
