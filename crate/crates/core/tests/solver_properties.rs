//! Solver laws on generated small graphs.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use broadcast_core::analysis::bound_report;
use broadcast_core::engine::Configuration;
use broadcast_core::graph::*;
use broadcast_core::solver::*;
use broadcast_core::verify::enumerate::{pairs, prufer_tree};

fn connected_graph(n: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seq: Vec<NodeId> = (0..n.saturating_sub(2)).map(|_| rng.gen_range(0..n)).collect();
    let tree = prufer_tree(n, &seq);
    let mut edges: Vec<(NodeId, NodeId)> = tree.edges().iter().map(|e| (e.u(), e.v())).collect();
    for (a, b) in pairs(n) {
        if !tree.has_edge(a, b) && rng.gen_bool(0.4) {
            edges.push((a, b));
        }
    }
    Graph::new(n, edges).unwrap()
}

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn more_agents_never_hurt(n in 3usize..=6, seed in any::<u64>()) {
        let g = connected_graph(n, seed);
        let b = Budget::default();
        let mut prev = false;
        for k in 1..n.min(5) {
            let now = solvable(&g, k, &Placement::Adversarial, &b).unwrap();
            prop_assert!(!prev || now, "solvable with {} but not {k}", k - 1);
            prev = now;
        }
    }

    #[test]
    fn bound_report_brackets_kstar(n in 3usize..=6, seed in any::<u64>()) {
        let g = connected_graph(n, seed);
        if let Some(k) = min_agents(&g, (n - 1).min(4), &Placement::Adversarial, &Budget::default()).value() {
            let r = bound_report(&g);
            prop_assert!(r.contains(k), "k* = {k}, report [{}, {:?}]", r.lower, r.upper);
        }
    }

    #[test]
    fn everyone_informed_takes_at_least_as_long(n in 3usize..=7, seed in any::<u64>()) {
        let g = connected_graph(n, seed);
        let c = Configuration::new(&[0], &[n - 1, n / 2]);
        let b = Budget::default();
        let first = game_value(&g, &c, Objective::FirstNewSource, &b).unwrap();
        let all = game_value(&g, &c, Objective::AllSources, &b).unwrap();
        match (first, all) {
            (Some(f), Some(a)) => prop_assert!(f <= a),
            (None, Some(_)) => prop_assert!(false, "all informed but nobody first"),
            _ => {}
        }
    }

    #[test]
    fn placements_are_counted_exactly(n in 2usize..=8, k in 1usize..=3, s in 1usize..=2) {
        prop_assume!(k + s <= n);
        prop_assert_eq!(distinct_placements(n, k, s).len(), binom(n, s) * binom(n - s, k));
    }
}

#[test]
fn known_family_values_are_bracketed() {
    for spec in ["theta:3,3", "theta:3,3,3", "ring:5", "complete:4", "complete:5", "lollipop:1,2", "path:5"] {
        let g: Graph = spec.parse::<FamilySpec>().unwrap().build().unwrap();
        let k = min_agents(&g, 4, &Placement::Adversarial, &Budget::default()).value().unwrap();
        let r = bound_report(&g);
        assert!(r.contains(k), "{spec}: k* = {k}, report [{}, {:?}]", r.lower, r.upper);
    }
}

#[test]
fn gluing_at_the_losing_source_keeps_the_bound() {
    let b = Budget::default();
    for (base, k) in [("ring:5", 1), ("ring:6", 1), ("complete:4", 1)] {
        let g: Graph = base.parse::<FamilySpec>().unwrap().build().unwrap();
        let lost = solve_placement(&g, k, 1, &Placement::Adversarial, &b).unwrap();
        assert!(!lost.agents_win());
        let v = lost.critical_state.unwrap().sources[0];
        let kg = min_agents(&g, 4, &Placement::Adversarial, &b).value().unwrap();
        for h in [make_path(2).unwrap(), make_complete(3).unwrap()] {
            let glued = glue_at_vertex(&g, v, &h, 0).unwrap();
            let kh = min_agents(&glued, 4, &Placement::Adversarial, &b);
            assert!(kh.value().map_or(true, |x| x >= kg), "{base} glued at {v}: {kh:?} < {kg}");
        }
    }
}
