//! Round semantics on generated graphs, configurations and removals.

use proptest::prelude::*;
use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use broadcast_core::engine::*;
use broadcast_core::graph::*;
use broadcast_core::strategies::simple::wilson_tree;
use broadcast_core::strategies::{RandomTree, TowardSource};
use broadcast_core::verify::enumerate::{pairs, prufer_tree};

fn connected_graph(n: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seq: Vec<NodeId> = (0..n.saturating_sub(2)).map(|_| rng.gen_range(0..n)).collect();
    let tree = prufer_tree(n, &seq);
    let mut edges: Vec<(NodeId, NodeId)> = tree.edges().iter().map(|e| (e.u(), e.v())).collect();
    for (a, b) in pairs(n) {
        if !tree.has_edge(a, b) && rng.gen_bool(0.3) {
            edges.push((a, b));
        }
    }
    Graph::new(n, edges).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn one_round_respects_the_rules(n in 2usize..=9, agents in 2usize..=5, seed in any::<u64>()) {
        prop_assume!(agents <= n);
        let g = connected_graph(n, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let mut nodes: Vec<NodeId> = (0..n).collect();
        nodes.shuffle(&mut rng);
        let sources = rng.gen_range(1..agents);
        let config = Configuration::new(&nodes[..sources], &nodes[sources..agents]);

        let kept = wilson_tree(&g, &mut rng);
        let removed: Vec<Edge> = (0..g.edge_count()).filter(|e| !kept.contains(e)).map(|e| g.edge(e)).collect();
        prop_assert!(validate_removal(&g, &removed).unwrap());
        let ids: Vec<EdgeId> = removed.iter().map(|e| g.edge_id(e.u(), e.v()).unwrap()).collect();
        let view = Surviving::without(&g, &ids);
        let moves: Vec<NodeId> = config
            .positions()
            .iter()
            .map(|&p| {
                let opts: Vec<NodeId> = std::iter::once(p).chain(view.neighbors(p)).collect();
                opts[rng.gen_range(0..opts.len())]
            })
            .collect();
        let (next, converted) = apply_round(&g, &config, &removed, &moves).unwrap();

        prop_assert_eq!(next.positions(), moves.clone());
        prop_assert!(next.source_count() >= config.source_count());
        prop_assert_eq!(next.source_count() - config.source_count(), converted.len());
        let hot = next.source_positions();
        for i in next.ignorant_ids() {
            prop_assert!(!hot.contains(&next.position(i)));
        }
        for a in 0..config.len() {
            let before = view.distances(config.position(a));
            let after = view.distances(next.position(a));
            for b in 0..config.len() {
                prop_assert!(before[config.position(b)] <= after[next.position(b)] + 2);
            }
        }
    }

    #[test]
    fn disconnecting_removals_are_rejected(n in 3usize..=8, seed in any::<u64>()) {
        let g = connected_graph(n, seed);
        let config = Configuration::new(&[0], &[1]);
        let all: Vec<Edge> = g.edges().to_vec();
        prop_assert!(!validate_removal(&g, &all).unwrap());
        prop_assert_eq!(apply_round(&g, &config, &all, &[0, 1]), Err(EngineError::Disconnecting));
    }

    #[test]
    fn simulation_is_reproducible(n in 3usize..=10, seed in any::<u64>()) {
        let g = connected_graph(n, seed);
        let init = Configuration::new(&[0], &[n - 1]);
        let run = || simulate(&g, &init, &mut TowardSource, &mut RandomTree::new(seed), 100).unwrap().to_json_string();
        prop_assert_eq!(run(), run());
    }
}

#[test]
fn swapping_agents_do_not_meet() {
    let g = make_path(2).unwrap();
    let c = Configuration::new(&[0], &[1]);
    let (next, converted) = apply_round(&g, &c, &[], &[1, 0]).unwrap();
    assert!(converted.is_empty());
    assert_eq!(next.ignorant_count(), 1);
}
