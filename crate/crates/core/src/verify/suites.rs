//! Named check suites. Each one recomputes a claim and reports one row per
//! check; simulation traces are kept so repeated runs can be compared.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Display;
use std::time::Instant;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use super::enumerate::{all_trees, connected_masks, mask_graph, Canon};
use super::experiment::{run_experiment, ExperimentSpec, SimPlacement};
use super::trace_check::check_trace;
use crate::analysis::{clique_star_requirement, diameter, timing_bounds, TimingQuery};
use crate::engine::{AdversaryPolicy, Configuration, Outcome, Trace};
use crate::graph::*;
use crate::solver::*;
use crate::strategies::{BondBlocker, IsolationTree, ThetaBlocker, ThetaBroadcast};

pub const SUITES: &[(&str, &str)] = &[
    ("theta_exact", "exact k* of the theta graph with three paths of length 3"),
    ("theta_algorithm", "theta broadcast with k = paths against optimal and random adversaries"),
    ("lower_bounds", "blocking adversaries win against optimal agents"),
    ("grid", "flip-flop adversary traps greedy agents on the 3x3 grid"),
    ("benchmarks", "k* of rings, paths and cliques"),
    ("timing", "round counts on paths and trees against closed forms"),
    ("density", "edge densities against closed forms"),
    ("family_counts", "k* of clique-star and lollipop instances"),
    ("structure", "solver reduction, monotonicity, contraction and trace checks"),
];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Row {
    pub suite: String,
    pub check: String,
    pub expected: String,
    pub actual: String,
    pub passed: bool,
}

#[derive(Debug, Clone, Default)]
pub struct SuiteReport {
    pub rows: Vec<Row>,
    /// Simulation traces, labelled, in run order.
    pub traces: Vec<(String, Trace)>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.passed)
    }

    pub fn suite_rows<'a>(&'a self, suite: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.suite == suite)
    }

    fn row(&mut self, suite: &str, check: impl Into<String>, expected: impl Display, actual: impl Display, passed: bool) {
        self.rows.push(Row {
            suite: suite.into(),
            check: check.into(),
            expected: expected.to_string(),
            actual: actual.to_string(),
            passed,
        });
    }

    fn eq<T: PartialEq + Display>(&mut self, suite: &str, check: impl Into<String>, expected: T, actual: T) {
        let ok = expected == actual;
        self.row(suite, check, expected, actual, ok);
    }

    /// Keeps the trace and adds a row for its independent re-validation.
    fn trace(&mut self, suite: &str, label: String, trace: Trace) {
        let (actual, ok) = match check_trace(&trace) {
            Ok(s) => (format!("valid, max contraction {}", s.max_contraction), true),
            Err(e) => (e.to_string(), false),
        };
        self.row(suite, format!("{label}: trace re-validates"), "valid, max contraction <= 2", actual, ok);
        self.traces.push((label, trace));
    }
}

pub fn suite_names() -> impl Iterator<Item = &'static str> {
    SUITES.iter().map(|(n, _)| *n)
}

/// Runs one suite, or every suite for `all`.
pub fn run_suite(name: &str) -> Result<SuiteReport, VerifyError> {
    let mut report = SuiteReport::default();
    if name == "all" {
        for s in suite_names() {
            run_into(s, &mut report);
        }
        return Ok(report);
    }
    if !suite_names().any(|s| s == name) {
        return Err(VerifyError::UnknownSuite(name.into()));
    }
    run_into(name, &mut report);
    Ok(report)
}

fn run_into(name: &str, r: &mut SuiteReport) {
    match name {
        "theta_exact" => theta_exact(r),
        "theta_algorithm" => theta_algorithm(r),
        "lower_bounds" => lower_bounds(r),
        "grid" => grid(r),
        "benchmarks" => benchmarks(r),
        "timing" => timing(r),
        "density" => density(r),
        "family_counts" => family_counts(r),
        "structure" => structure(r),
        _ => unreachable!("suite names are checked by the caller"),
    }
}

fn fam(spec: &str) -> Graph {
    spec.parse::<FamilySpec>()
        .and_then(|f| f.build())
        .expect("suite graphs are valid")
}

fn show_min(m: &MinAgents) -> String {
    match m {
        MinAgents::Exactly { k } => k.to_string(),
        MinAgents::AboveMax { k_max } => format!("> {k_max}"),
        MinAgents::Undecided { k, reason } => format!("undecided at {k}: {reason}"),
    }
}

fn kstar(g: &Graph) -> MinAgents {
    let k_max = (g.node_count().saturating_sub(1)).min(Budget::default().max_agents - 1);
    min_agents(g, k_max, &Placement::Adversarial, &Budget::default())
}

fn theta_exact(r: &mut SuiteReport) {
    let g = fam("theta:3,3,3");
    r.eq("theta_exact", "k* of theta:3,3,3, adversarial placement", "3".to_string(), show_min(&kstar(&g)));
}

fn theta_algorithm(r: &mut SuiteReport) {
    const S: &str = "theta_algorithm";
    for (spec, k) in [("theta:3,3", 2), ("theta:3,3,3", 3)] {
        let g = fam(spec);
        let inits: Vec<Configuration> = distinct_placements(g.node_count(), k, 1)
            .iter()
            .map(CanonicalState::to_configuration)
            .collect();
        let actual = match check_agents(&g, &inits, &ThetaBroadcast::new(k), &Budget::default()) {
            Ok(res) => format!("{:?}", res.winner),
            Err(e) => e.to_string(),
        };
        r.eq(S, format!("{spec} k={k} vs every adversary, every placement"), "Agents".to_string(), actual);
    }
    let mut solved = 0;
    for seed in 0..50 {
        let mut spec = ExperimentSpec::new("theta:4,4,4,4", "theta_broadcast", "random_tree", 4);
        spec.seed = seed;
        spec.placement = SimPlacement::Random;
        spec.max_rounds = 500;
        let label = spec.label();
        match run_experiment(&spec, None) {
            Ok(t) => {
                solved += usize::from(matches!(t.outcome, Outcome::Solved { .. }));
                r.trace(S, label, t);
            }
            Err(e) => r.row(S, label, "trace", e, false),
        }
    }
    r.eq(S, "theta:4,4,4,4 k=4, random trees: solved within 500 rounds", 50, solved);
}

fn adversary_row(r: &mut SuiteReport, label: &str, g: &Graph, adv: &dyn AdversaryPolicy, k: usize, sources: usize) {
    let actual = match adv.place(g, k, sources) {
        Some(Ok(init)) => match check_adversary(g, &[init], adv, &Budget::default()) {
            Ok(res) => format!("{:?}", res.winner),
            Err(e) => e.to_string(),
        },
        Some(Err(e)) => e.to_string(),
        None => "no placement".into(),
    };
    r.eq(
        "lower_bounds",
        format!("{label}: {} with {k} ignorant + {sources} source vs optimal agents", adv.name()),
        "Adversary".to_string(),
        actual,
    );
}

fn lower_bounds(r: &mut SuiteReport) {
    for (spec, k) in [("theta:3,3", 1), ("theta:3,4", 1), ("theta:3,3,3", 2), ("theta:3,4,3", 2)] {
        adversary_row(r, spec, &fam(spec), &ThetaBlocker, k, 1);
    }
    for spec in ["theta:3,3,3", "theta:3,4,3"] {
        let g = fam(spec);
        match BondBlocker::largest(&g) {
            // k1 + k2 = m - 1 with one source
            Ok(b) => {
                let m = b.bond().size();
                adversary_row(r, spec, &g, &b, m - 2, 1)
            }
            Err(e) => r.row("lower_bounds", format!("{spec}: bond_blocker"), "matching bond", e, false),
        }
    }
    for (spec, k) in [("complete:4", 1), ("complete:5", 2)] {
        adversary_row(r, spec, &fam(spec), &IsolationTree, k, 1);
    }
}

fn grid(r: &mut SuiteReport) {
    const S: &str = "grid";
    let mut spec = ExperimentSpec::new("grid:3x3", "greedy_path", "grid_flipflop:3x3", 5);
    spec.placement = SimPlacement::Adversary;
    spec.max_rounds = 10;
    let start = Instant::now();
    let run = run_experiment(&spec, None);
    let elapsed = start.elapsed();
    match run {
        Ok(t) => {
            let cycle = match t.outcome {
                Outcome::AdversaryCycle { period, .. } => format!("cycle of period {period}"),
                other => format!("{other:?}"),
            };
            r.eq(S, "outcome within 10 rounds", "cycle of period 2".to_string(), cycle);
            r.eq(S, "conversions", 0, t.conversions());
            r.row(S, "runtime", "< 1s", format!("{elapsed:?}"), elapsed.as_secs_f64() < 1.0);
            r.trace(S, spec.label(), t);
        }
        Err(e) => r.row(S, spec.label(), "trace", e, false),
    }
}

fn benchmarks(r: &mut SuiteReport) {
    let mut cases: Vec<(String, usize)> = vec![("ring:5".into(), 2), ("ring:6".into(), 2)];
    cases.extend((2..=8).map(|n| (format!("path:{n}"), 1)));
    cases.extend([("complete:4".into(), 2), ("complete:5".into(), 3)]);
    for (spec, want) in cases {
        let got = show_min(&kstar(&fam(&spec)));
        r.eq("benchmarks", format!("k* of {spec}"), want.to_string(), got);
    }
}

fn show_value(v: Result<Option<u32>, SolverError>) -> String {
    match v {
        Ok(Some(v)) => v.to_string(),
        Ok(None) => "never".into(),
        Err(e) => e.to_string(),
    }
}

/// Lowest-id pair of nodes at maximum distance.
fn diameter_ends(g: &Graph) -> (NodeId, NodeId) {
    let d = diameter(g);
    (0..g.node_count())
        .find_map(|a| {
            let dist = g.distances(a);
            (0..g.node_count()).find(|&b| dist[b] == d).map(|b| (a, b))
        })
        .expect("nonempty graph")
}

fn timing(r: &mut SuiteReport) {
    const S: &str = "timing";
    let b = Budget::default();
    for n in 2..=10 {
        for x in 1..=2 {
            for y in 1..=2 {
                if x + y > n {
                    continue;
                }
                let g = make_path(n).expect("path");
                let ignorant: Vec<NodeId> = (0..x).collect();
                let sources: Vec<NodeId> = (n - y..n).collect();
                let c = Configuration::new(&sources, &ignorant);
                let first = timing_bounds(TimingQuery::PathFirst { n, x, y }).expect("valid query");
                r.eq(
                    S,
                    format!("path:{n} x={x} y={y} first new source"),
                    first.to_string(),
                    show_value(game_value(&g, &c, Objective::FirstNewSource, &b)),
                );
                let all = timing_bounds(TimingQuery::PathAll { n, y }).expect("valid query");
                r.eq(
                    S,
                    format!("path:{n} x={x} y={y} all sources"),
                    all.to_string(),
                    show_value(game_value(&g, &c, Objective::AllSources, &b)),
                );
            }
        }
    }

    let mut trees: Vec<Graph> = (2..=6).flat_map(all_trees).collect();
    trees.extend((7..=9).map(|n| make_path(n).expect("path")));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut sampled = 0;
    while sampled < 100 {
        let n = rng.gen_range(7..=12);
        let seq: Vec<NodeId> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
        let t = super::enumerate::prufer_tree(n, &seq);
        if diameter(&t) <= 8 {
            sampled += 1;
            trees.push(t);
        }
    }
    let mut bad = Vec::new();
    for t in &trees {
        let (a, z) = diameter_ends(t);
        let c = Configuration::new(&[z], &[a]);
        let want = timing_bounds(TimingQuery::TreeDiameter { tree: t }).expect("tree");
        let got = show_value(game_value(t, &c, Objective::FirstNewSource, &b));
        if got != want.to_string() {
            bad.push(format!("{:?}: {got} vs {want}", t.to_json().edges));
        }
    }
    r.row(
        S,
        format!("{} trees of diameter <= 8, agents at diameter ends", trees.len()),
        "ceil(d/2) for every tree",
        if bad.is_empty() { "all match".into() } else { format!("{} mismatches, first {}", bad.len(), bad[0]) },
        bad.is_empty(),
    );
}

fn rational(q: Ratio<i64>) -> Rational {
    Rational::new(*q.numer(), *q.denom())
}

fn sweep(r: &mut SuiteReport, check: &str, cases: impl Iterator<Item = (String, Result<Graph, GraphError>, Ratio<i64>)>) {
    let mut count = 0;
    let mut bad = Vec::new();
    for (label, g, want) in cases {
        count += 1;
        match g {
            Ok(g) if edge_density(&g) == rational(want) => {}
            Ok(g) => bad.push(format!("{label}: {} vs {}", edge_density(&g), rational(want))),
            Err(e) => bad.push(format!("{label}: {e}")),
        }
    }
    r.row(
        "density",
        format!("{check} ({count} graphs, n <= 200)"),
        "exact equality",
        if bad.is_empty() { "all equal".into() } else { format!("{} differ, first {}", bad.len(), bad[0]) },
        bad.is_empty() && count > 0,
    );
}

fn density(r: &mut SuiteReport) {
    const S: &str = "density";
    let q = |a: usize, b: usize| Ratio::new(a as i64, b as i64);
    let one = Ratio::from_integer(1);

    sweep(
        r,
        "uniform theta 1+(l-2)/(ld+2)",
        (2..=198usize).flat_map(|l| (1..=198usize).filter(move |d| l * d + 2 <= 200).map(move |d| (l, d))).map(|(l, d)| {
            (format!("theta l={l} d={d}"), make_theta(&vec![d; l]), one + Ratio::new(l as i64 - 2, (l * d + 2) as i64))
        }),
    );
    sweep(
        r,
        "density family 1+1/f-(2/n)(1+1/f)",
        (3..=200usize)
            .flat_map(|n| (1..=n - 2).filter(move |f| (n - 2) % f == 0).map(move |f| (n, f)))
            .map(|(n, f)| {
                let inv = q(1, f);
                (format!("n={n} f={f}"), make_density_family(n, f), one + inv - q(2, n) * (one + inv))
            }),
    );
    sweep(
        r,
        "lollipop (p+C(k+2,2))/(p+k+2)",
        (1..=197usize)
            .flat_map(|k| (1..=197usize).filter(move |p| p + k + 2 <= 200).map(move |p| (k, p)))
            .map(|(k, p)| (format!("k={k} p={p}"), make_lollipop(k, p), q(p + (k + 2) * (k + 1) / 2, p + k + 2))),
    );
    sweep(
        r,
        "clique-star l*C((n-1)/l+1,2)/n",
        (3..=200usize)
            .flat_map(|n| (1..n).filter(move |l| (n - 1) % l == 0 && (n - 1) / l >= 2).map(move |l| (n, l)))
            .map(|(n, l)| {
                let s = (n - 1) / l + 1;
                (format!("n={n} l={l}"), make_clique_star(n, l), q(l * s * (s - 1) / 2, n))
            }),
    );

    let grid = edge_density(&make_grid(2, 3).expect("grid"));
    r.eq(S, "2x3 grid density (1.1666..)", Rational::new(7, 6), grid);
    let (n, d) = (100, 4);
    let printed = rational(one + Ratio::new(n - 2 - 2 * d, n * d));
    r.eq(S, "1+(n-2-2d)/(nd) at n=100, d=4 (1.225)", Rational::new(49, 40), printed);
    let family_form = rational(one + Ratio::new(1, d) - Ratio::new(2, n) * (one + Ratio::new(1, d)));
    r.eq(S, "density family closed form at n=100, f=4", Rational::new(49, 40), family_form);
    // n = ceil(k^2 / (rho - 1)) path edges
    let (k, rho) = (2usize, Ratio::new(3i64, 2));
    let p = (Ratio::from_integer((k * k) as i64) / (rho - one)).ceil().to_integer() as usize;
    let lolli = edge_density(&make_lollipop(k, p).expect("lollipop"));
    r.row(S, format!("lollipop k=2 path={p} density <= 3/2"), "<= 3/2", lolli, lolli.to_f64() <= 1.5 && lolli == Rational::new(7, 6));
}

fn family_counts(r: &mut SuiteReport) {
    let g = fam("clique_star:7,2");
    r.eq(
        "family_counts",
        "k* of clique_star:7,2 (n-2l+1)",
        clique_star_requirement(7, 2).to_string(),
        show_min(&kstar(&g)),
    );
    r.eq("family_counts", "k* of lollipop:2,2", "2".to_string(), show_min(&kstar(&fam("lollipop:2,2"))));
}

fn structure(r: &mut SuiteReport) {
    const S: &str = "structure";
    let b = Budget::default();

    // spanning trees vs all subsets, every labelled graph
    for n in 2..=5 {
        let masks = connected_masks(n);
        let mut diffs = Vec::new();
        for &m in &masks {
            let g = mask_graph(n, m);
            for agents in 2..=3 {
                for sources in 1..agents {
                    let build = |br| ValueTable::build(&g, agents, sources, agents, br, &b);
                    match (build(Branching::SpanningTrees), build(Branching::AllSubsets)) {
                        (Ok(t), Ok(a)) => {
                            let tv: BTreeMap<_, _> = t.entries().collect();
                            let av: BTreeMap<_, _> = a.entries().collect();
                            if tv != av {
                                diffs.push(format!("mask {m:#x}, {agents} agents, {sources} sources"));
                            }
                        }
                        (Err(e), _) | (_, Err(e)) => diffs.push(format!("mask {m:#x}: {e}")),
                    }
                }
            }
        }
        r.row(
            S,
            format!("{} connected graphs on {n} nodes: tree branching = subset branching", masks.len()),
            "identical values",
            if diffs.is_empty() { "identical".into() } else { format!("{} differ, first {}", diffs.len(), diffs[0]) },
            diffs.is_empty(),
        );
    }

    // k*(H) >= k*(G) for spanning subgraphs G of H
    for n in 2..=5 {
        let canon = Canon::new(n);
        let masks = connected_masks(n);
        let mut by_class: HashMap<u32, MinAgents> = HashMap::new();
        let mut k_of = HashMap::new();
        for &m in &masks {
            let c = canon.canonical(m);
            let v = by_class.entry(c).or_insert_with(|| kstar(&mask_graph(n, c))).clone();
            k_of.insert(m, v);
        }
        let undecided: Vec<_> = by_class.values().filter(|v| matches!(v, MinAgents::Undecided { .. })).collect();
        let rank = |v: &MinAgents| v.value().unwrap_or(usize::MAX);
        let mut pairs = 0;
        let mut bad = Vec::new();
        for &h in &masks {
            for &g in &masks {
                if g & !h == 0 && g != h {
                    pairs += 1;
                    if rank(&k_of[&h]) < rank(&k_of[&g]) {
                        bad.push(format!("G {g:#x} k*={}, H {h:#x} k*={}", show_min(&k_of[&g]), show_min(&k_of[&h])));
                    }
                }
            }
        }
        r.row(
            S,
            format!("{pairs} subgraph pairs on {n} nodes: k*(H) >= k*(G)"),
            "no violation",
            if !undecided.is_empty() {
                format!("{} classes undecided", undecided.len())
            } else if bad.is_empty() {
                "no violation".into()
            } else {
                format!("{} violations, first {}", bad.len(), bad[0])
            },
            bad.is_empty() && undecided.is_empty(),
        );
    }

    // contracting bridges keeps k*
    for n in 3..=6 {
        let canon = Canon::new(n);
        let mut classes: Vec<u32> = connected_masks(n).iter().map(|&m| canon.canonical(m)).collect();
        classes.sort_unstable();
        classes.dedup();
        let (mut compared, mut points) = (0, 0);
        let mut bad = Vec::new();
        for c in classes {
            let g = mask_graph(n, c);
            if bridges(&g).is_empty() {
                continue;
            }
            let (h, _) = contract_cut_edges(&g);
            if h.node_count() == 1 {
                // a tree collapses to a point, where nothing is left to play
                points += 1;
                continue;
            }
            compared += 1;
            let (kg, kh) = (kstar(&g), kstar(&h));
            if kg != kh || matches!(kg, MinAgents::Undecided { .. }) {
                bad.push(format!("{:?}: {} vs contracted {}", g.to_json().edges, show_min(&kg), show_min(&kh)));
            }
        }
        r.row(
            S,
            format!("{compared} bridged graph classes on {n} nodes ({points} trees skipped): contraction keeps k*"),
            "equal k*",
            if bad.is_empty() { "equal".into() } else { format!("{} differ, first {}", bad.len(), bad[0]) },
            bad.is_empty(),
        );
    }

    // pairwise distances shrink by at most 2 per round
    for (i, family) in ["ring:7", "grid:3x3", "theta:2,3,4", "complete:5", "lollipop:2,3", "clique_star:7,3"]
        .iter()
        .enumerate()
    {
        for seed in 0..4u64 {
            let mut spec = ExperimentSpec::new(family, "toward_source", "random_tree", 2 + i % 2);
            spec.seed = seed;
            spec.placement = SimPlacement::Random;
            spec.max_rounds = 100;
            let label = spec.label();
            match run_experiment(&spec, None) {
                Ok(t) => r.trace(S, label, t),
                Err(e) => r.row(S, label, "trace", e, false),
            }
        }
    }
}
