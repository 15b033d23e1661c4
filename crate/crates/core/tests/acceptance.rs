//! The ten acceptance criteria, one test each. Every test prints a single
//! `PASS`/`FAIL` line; run with `--nocapture` to see all of them.

use std::collections::HashSet;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use itertools::Itertools;
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use broadcast_core::engine::*;
use broadcast_core::graph::*;
use broadcast_core::solver::*;
use broadcast_core::strategies::theta_broadcast::allowed_change;
use broadcast_core::strategies::*;
use broadcast_core::verify::{check_trace, run_suite, SuiteReport};

fn report(n: usize, title: &str, ok: bool, detail: impl AsRef<str>) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {n:>2} {title}: {}", detail.as_ref());
    assert!(ok, "criterion {n} ({title}) failed: {}", detail.as_ref());
}

fn fam(spec: &str) -> Graph {
    spec.parse::<FamilySpec>().unwrap().build().unwrap()
}

fn kstar(g: &Graph, k_max: usize) -> Option<usize> {
    min_agents(g, k_max, &Placement::Adversarial, &Budget::default()).value()
}

/// One run of every verify suite, shared by the tests that need it.
fn full_suite() -> &'static SuiteReport {
    static FIRST: OnceLock<SuiteReport> = OnceLock::new();
    FIRST.get_or_init(|| run_suite("all").unwrap())
}

#[test]
fn criterion_01_theta_exactness() {
    let start = Instant::now();
    let k = kstar(&fam("theta:3,3,3"), 4);
    let took = start.elapsed();
    report(
        1,
        "k* of theta 3,3,3 under adversarial placement",
        k == Some(3) && took < Duration::from_secs(300),
        format!("k* = {k:?} in {took:.1?}"),
    );
}

#[test]
fn criterion_02_theta_algorithm_soundness() {
    let mut notes = Vec::new();
    let mut ok = true;
    for (spec, k) in [("theta:3,3", 2), ("theta:3,3,3", 3)] {
        let g = fam(spec);
        let inits: Vec<Configuration> = distinct_placements(g.node_count(), k, 1)
            .iter()
            .map(CanonicalState::to_configuration)
            .collect();
        let res = check_agents(&g, &inits, &ThetaBroadcast::new(k), &Budget::default()).unwrap();
        ok &= res.agents_win();
        notes.push(format!("{spec} {:?} in <= {:?} rounds", res.winner, res.optimal_rounds));
    }
    let g = fam("theta:4,4,4,4");
    let mut wins = 0;
    for seed in 0..50u64 {
        let mut nodes: Vec<NodeId> = (0..g.node_count()).collect();
        nodes.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let init = Configuration::new(&nodes[..1], &nodes[1..5]);
        let mut agents = ThetaBroadcast::new(4);
        let t = simulate(&g, &init, &mut agents, &mut RandomTree::new(seed), 500).unwrap();
        let legal = t.rounds.iter().all(|r| validate_removal(&g, &r.removed).unwrap());
        let phases = agents.transitions().iter().all(|c| allowed_change(c.from, c.to));
        let solved = matches!(t.outcome, Outcome::Solved { round } if round <= 500);
        if solved && legal && phases && check_trace(&t).is_ok() {
            wins += 1;
        }
    }
    ok &= wins == 50;
    notes.push(format!("theta 4,4,4,4 random trees {wins}/50"));
    report(2, "theta broadcast with k = number of paths", ok, notes.join("; "));
}

#[test]
fn criterion_03_lower_bound_adversaries() {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut run = |label: String, g: &Graph, adv: &dyn AdversaryPolicy, k: usize| {
        let init = adv.place(g, k, 1).unwrap().unwrap();
        let res = check_adversary(g, &[init], adv, &Budget::default()).unwrap();
        ok &= res.winner == Winner::Adversary;
        notes.push(format!("{label} {:?}", res.winner));
    };
    for (spec, paths) in [("theta:3,3", 2), ("theta:3,3,3", 3), ("theta:3,4,3", 3)] {
        run(format!("theta_blocker {spec} k={}", paths - 1), &fam(spec), &ThetaBlocker, paths - 1);
    }
    for spec in ["theta:3,3,3", "theta:3,4,3"] {
        let g = fam(spec);
        let b = BondBlocker::largest(&g).unwrap();
        let m = b.bond().size();
        // k1 + k2 = m - 1 with a single source
        run(format!("bond_blocker {spec} m={m}"), &g, &b, m - 2);
    }
    for n in [4, 5] {
        let g = make_complete(n).unwrap();
        run(format!("isolation_tree K{n} k={}", n - 3), &g, &IsolationTree, n - 3);
    }
    report(3, "blocking adversaries beat optimal agents", ok, notes.join("; "));
}

#[test]
fn criterion_04_grid_flipflop() {
    let start = Instant::now();
    let g = make_grid(3, 3).unwrap();
    let mut adv = GridFlipflop::new(3, 3).unwrap();
    let init = adv.place(&g, 5, 1).unwrap().unwrap();
    let t = simulate(&g, &init, &mut GreedyPath, &mut adv, 10).unwrap();
    let took = start.elapsed();
    let configs = t.configurations();
    // state at the start of round t + 2 equals the one at round t
    let period_two = configs.len() >= 3 && (2..configs.len()).all(|t| configs[t] == configs[t - 2]);
    let cycle = matches!(t.outcome, Outcome::AdversaryCycle { period: 2, repeat_round } if repeat_round <= 10);
    let ok = cycle && period_two && t.conversions() == 0 && took < Duration::from_secs(1);
    report(
        4,
        "greedy agents on the 3x3 grid",
        ok,
        format!("{:?}, {} conversions, {took:?}", t.outcome, t.conversions()),
    );
}

#[test]
fn criterion_05_known_benchmarks() {
    let mut cases: Vec<(String, usize)> = vec![("ring:5".into(), 2), ("ring:6".into(), 2)];
    cases.extend((2..=8).map(|n| (format!("path:{n}"), 1)));
    cases.extend([("complete:4".into(), 2), ("complete:5".into(), 3)]);
    let mut bad = Vec::new();
    for (spec, want) in &cases {
        let g = fam(spec);
        let got = kstar(&g, (g.node_count() - 1).min(4));
        if got != Some(*want) {
            bad.push(format!("{spec}: {got:?} != {want}"));
        }
    }
    report(5, "k* of rings, paths and cliques", bad.is_empty(), format!("{} graphs, mismatches {bad:?}", cases.len()));
}

/// Fewest rounds until `goal` agents are informed when nobody hinders the
/// agents. On a tree every edge is a bridge, so this is the game value.
fn cooperative_rounds(g: &Graph, sources: &[NodeId], ignorant: &[NodeId], goal: usize) -> usize {
    let inform = |pos: &[NodeId], info: &mut Vec<bool>| {
        let hot: Vec<NodeId> = pos.iter().zip(info.iter()).filter(|p| *p.1).map(|p| *p.0).collect();
        for (p, i) in pos.iter().zip(info.iter_mut()) {
            *i |= hot.contains(p);
        }
    };
    let pos: Vec<NodeId> = sources.iter().chain(ignorant).copied().collect();
    let mut info: Vec<bool> = (0..pos.len()).map(|i| i < sources.len()).collect();
    inform(&pos, &mut info);
    let mut frontier = vec![(pos, info)];
    let mut seen: HashSet<(Vec<NodeId>, Vec<bool>)> = frontier.iter().cloned().collect();
    for round in 0.. {
        if frontier.iter().any(|(_, i)| i.iter().filter(|&&b| b).count() >= goal) {
            return round;
        }
        let mut next = Vec::new();
        for (pos, info) in &frontier {
            let options = pos.iter().map(|&p| std::iter::once(p).chain(g.neighbors(p)).collect::<Vec<_>>());
            for moved in options.multi_cartesian_product() {
                let mut i2 = info.clone();
                inform(&moved, &mut i2);
                if seen.insert((moved.clone(), i2.clone())) {
                    next.push((moved, i2));
                }
            }
        }
        frontier = next;
    }
    unreachable!()
}

#[test]
fn criterion_06_timing() {
    let b = Budget::default();
    let (mut rows, mut formula_misses, mut oracle_misses) = (0, Vec::new(), Vec::new());
    for n in 2..=10usize {
        for x in 1..=2usize {
            for y in 1..=2usize {
                if x + y > n {
                    continue;
                }
                let g = make_path(n).unwrap();
                let ign: Vec<NodeId> = (0..x).collect();
                let src: Vec<NodeId> = (n - y..n).collect();
                let c = Configuration::new(&src, &ign);
                for (obj, closed, goal) in [
                    (Objective::FirstNewSource, (n - x - y).div_ceil(2), y + 1),
                    (Objective::AllSources, (n - y).div_ceil(2), x + y),
                ] {
                    rows += 1;
                    let v = game_value(&g, &c, obj, &b).unwrap().map(|v| v as usize);
                    let oracle = cooperative_rounds(&g, &src, &ign, goal);
                    if v != Some(oracle) {
                        oracle_misses.push(format!("n={n} x={x} y={y} {obj:?}"));
                    }
                    if v != Some(closed) {
                        formula_misses.push(format!("n={n} x={x} y={y} {obj:?}: {v:?} vs {closed}"));
                    }
                }
            }
        }
    }
    let mut trees: Vec<Graph> = (2..=9).map(|n| make_path(n).unwrap()).collect();
    // spiders and caterpillars up to diameter 8
    trees.push(Graph::new(7, [(0, 1), (1, 2), (0, 3), (3, 4), (0, 5), (5, 6)]).unwrap());
    trees.push(Graph::new(9, [(0, 1), (1, 2), (2, 3), (3, 4), (1, 5), (2, 6), (3, 7), (7, 8)]).unwrap());
    trees.push(Graph::new(10, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (4, 9)]).unwrap());
    for t in &trees {
        rows += 1;
        let n = t.node_count();
        let (a, z, d) = (0..n)
            .flat_map(|a| {
                let dist = t.distances(a);
                (0..n).map(move |z| (a, z, dist[z]))
            })
            .max_by_key(|&(a, z, d)| (d, std::cmp::Reverse((a, z))))
            .unwrap();
        let c = Configuration::new(&[z], &[a]);
        let v = game_value(t, &c, Objective::FirstNewSource, &b).unwrap().map(|v| v as usize);
        if v != Some(cooperative_rounds(t, &[z], &[a], 2)) {
            oracle_misses.push(format!("tree {:?}", t.to_json().edges));
        }
        if v != Some(d.div_ceil(2)) {
            formula_misses.push(format!("tree diameter {d}: {v:?}"));
        }
    }
    assert!(oracle_misses.is_empty(), "solver disagrees with the cooperative oracle: {oracle_misses:?}");
    report(
        6,
        "round counts on paths and trees",
        formula_misses.is_empty(),
        format!(
            "{rows} cases, solver agrees with oracle on all, closed form misses {}: {}",
            formula_misses.len(),
            formula_misses.iter().take(6).join(", ")
        ),
    );
}

fn r(a: usize, b: usize) -> Ratio<i64> {
    Ratio::new(a as i64, b as i64)
}

fn same(g: &Graph, q: Ratio<i64>) -> bool {
    edge_density(g) == Rational::new(*q.numer(), *q.denom())
}

#[test]
fn criterion_07_density_formulas() {
    let one = Ratio::from_integer(1);
    let (mut count, mut bad) = (0, Vec::new());
    let mut check = |label: String, g: Graph, q: Ratio<i64>| {
        count += 1;
        if !same(&g, q) {
            bad.push(format!("{label}: {} vs {q}", edge_density(&g)));
        }
    };
    for l in 2..=198usize {
        for d in (1..).take_while(|d| l * d + 2 <= 200) {
            check(format!("theta {l}x{d}"), make_theta(&vec![d; l]).unwrap(), one + Ratio::new(l as i64 - 2, (l * d + 2) as i64));
        }
    }
    for n in 3..=200usize {
        for f in (1..=n - 2).filter(|f| (n - 2) % f == 0) {
            check(format!("family {n},{f}"), make_density_family(n, f).unwrap(), one + r(1, f) - r(2, n) * (one + r(1, f)));
        }
        for l in (1..n).filter(|l| (n - 1) % l == 0 && (n - 1) / l >= 2) {
            let s = (n - 1) / l + 1;
            check(format!("clique_star {n},{l}"), make_clique_star(n, l).unwrap(), r(l * s * (s - 1) / 2, n));
        }
    }
    for k in 1..=197usize {
        for p in (1..).take_while(|p| p + k + 2 <= 200) {
            check(format!("lollipop {k},{p}"), make_lollipop(k, p).unwrap(), r(p + (k + 2) * (k + 1) / 2, p + k + 2));
        }
    }
    let grid = same(&make_grid(2, 3).unwrap(), r(7, 6));
    // 1 + (n-2-2d)/(nd) at n = 100, d = 4
    let printed = one + r(100 - 2 - 8, 400) == r(1225, 1000);
    let lolli = edge_density(&make_lollipop(2, 8).unwrap());
    let lolli_ok = lolli == Rational::new(7, 6) && lolli.to_f64() <= 1.5;
    report(
        7,
        "edge densities against closed forms",
        bad.is_empty() && grid && printed && lolli_ok,
        format!(
            "{count} graphs, {} mismatches {:?}; 2x3 grid 7/6 {grid}; 1.225 {printed}; lollipop(2,8) {lolli} <= 3/2 {lolli_ok}",
            bad.len(),
            bad.iter().take(3).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_08_family_agent_counts() {
    let cs = kstar(&fam("clique_star:7,2"), 4);
    let lp = kstar(&fam("lollipop:2,2"), 4);
    report(
        8,
        "k* of clique_star(7,2) and lollipop(2,2)",
        cs == Some(7 + 1 - 2 * 2) && lp == Some(2),
        format!("clique_star {cs:?}, lollipop {lp:?}"),
    );
}

#[test]
fn criterion_09_structural_properties() {
    let full = full_suite();
    let rows: Vec<_> = full.suite_rows("structure").filter(|r| !r.check.contains("trace")).collect();
    let failed: Vec<_> = rows.iter().filter(|r| !r.passed).map(|r| r.check.clone()).collect();
    let mut worst = 0;
    let mut broken = Vec::new();
    for (label, t) in &full.traces {
        match check_trace(t) {
            Ok(s) => worst = worst.max(s.max_contraction),
            Err(e) => broken.push(format!("{label}: {e}")),
        }
    }
    report(
        9,
        "solver reduction, monotonicity, contraction, distance drops",
        rows.len() >= 12 && failed.is_empty() && broken.is_empty() && worst <= 2,
        format!(
            "{} exhaustive checks, failed {failed:?}; {} traces, largest drop {worst}, invalid {broken:?}",
            rows.len(),
            full.traces.len()
        ),
    );
}

#[test]
fn criterion_10_reproducibility() {
    let first = full_suite();
    let second = run_suite("all").unwrap();
    let a: Vec<String> = first.traces.iter().map(|(_, t)| t.to_json_string()).collect();
    let b: Vec<String> = second.traces.iter().map(|(_, t)| t.to_json_string()).collect();
    let differing = a.iter().zip(&b).filter(|(x, y)| x != y).count();
    report(
        10,
        "identical traces across two full verify runs",
        !a.is_empty() && a.len() == b.len() && differing == 0,
        format!("{} traces, {differing} differ", a.len()),
    );
}
