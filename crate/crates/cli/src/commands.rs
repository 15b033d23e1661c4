//! Subcommand bodies. Each returns the process exit code.

use std::path::{Path, PathBuf};

use serde::Serialize;

use broadcast_core::analysis::{summarize, Relation};
use broadcast_core::engine::{Outcome, Trace};
use broadcast_core::graph::{edge_density, FamilySpec, Graph};
use broadcast_core::solver::{
    game_value, solve_placement, Branching, Budget, CanonicalState, Objective, Placement, SolverError,
    SolverResult, ValueTable,
};
use broadcast_core::verify::{
    check_trace as check, run_experiment, run_suite, ExperimentSpec, GraphSource, Row, SimPlacement,
};

use crate::render::{json, table, write_file, Failure};
use crate::{Format, Global, GraphArg, ObjectiveArg, PlacementArg, SimulateArgs, SolveArgs, SolveMode, SolvePlacement};

pub const SOLVED: u8 = 0;
pub const FAILED: u8 = 1;
pub const CYCLE: u8 = 2;
pub const ROUND_LIMIT: u8 = 3;
pub const BUDGET: u8 = 4;

/// Family spec string for `kind p1 p2..`; `key=` prefixes are dropped.
fn family_spec(arg: &GraphArg) -> String {
    let tokens: Vec<&str> = arg
        .params
        .iter()
        .flat_map(|p| p.split(','))
        .map(|t| t.split_once('=').map_or(t, |(_, v)| v).trim())
        .filter(|t| !t.is_empty())
        .collect();
    match (arg.graph.contains(':'), tokens.is_empty()) {
        (_, true) => arg.graph.clone(),
        (true, false) => format!("{},{}", arg.graph, tokens.join(",")),
        (false, false) => format!("{}:{}", arg.graph, tokens.join(",")),
    }
}

/// A graph file if one exists at that path, else a family spec.
pub fn load_graph(arg: &GraphArg) -> Result<Graph, Failure> {
    let path = Path::new(&arg.graph);
    if arg.params.is_empty() && path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::new(FAILED, format!("cannot read {}: {e}", path.display())))?;
        return Graph::from_json_str(&text)
            .map_err(|e| Failure::new(FAILED, format!("{}: {e}", path.display())));
    }
    Ok(family_spec(arg).parse::<FamilySpec>()?.build()?)
}

#[derive(Serialize)]
struct Generated {
    family: String,
    nodes: usize,
    edges: usize,
    density: String,
}

pub fn generate(global: &Global, arg: &GraphArg) -> Result<u8, Failure> {
    let g = load_graph(arg)?;
    let summary = Generated {
        family: family_spec(arg),
        nodes: g.node_count(),
        edges: g.edge_count(),
        density: edge_density(&g).to_string(),
    };
    let line = match global.format {
        Format::Json => json(&summary),
        Format::Table => format!(
            "{}: nodes {}, edges {}, density {}",
            summary.family, summary.nodes, summary.edges, summary.density
        ),
    };
    match &global.output {
        Some(path) => {
            write_file(path, &g.to_json_string())?;
            println!("{line}");
        }
        None => {
            eprintln!("{line}");
            println!("{}", g.to_json_string());
        }
    }
    Ok(SOLVED)
}

pub fn analyze(global: &Global, arg: &GraphArg, bond_cap: usize) -> Result<u8, Failure> {
    let g = load_graph(arg)?;
    let s = summarize(&g, bond_cap);
    let text = match global.format {
        Format::Json => json(&s),
        Format::Table => {
            let interval = format!(
                "[{}, {}]",
                s.bounds.lower,
                s.bounds.upper.map_or("?".to_string(), |u| u.to_string())
            );
            let largest_matching = s.bonds.iter().filter(|b| b.is_matching).map(|b| b.size()).max();
            let mut rows = vec![
                vec!["nodes".into(), s.nodes.to_string()],
                vec!["edges".into(), s.edges.to_string()],
                vec!["density".into(), s.density.to_string()],
                vec!["min degree".into(), s.min_degree.to_string()],
                vec!["edge connectivity".into(), s.edge_connectivity.to_string()],
                vec!["vertex connectivity".into(), s.vertex_connectivity.to_string()],
                vec!["diameter".into(), s.diameter.to_string()],
                vec![
                    format!("bonds (size <= {bond_cap})"),
                    s.bonds_note.clone().unwrap_or_else(|| s.bonds.len().to_string()),
                ],
                vec![
                    "largest matching bond".into(),
                    largest_matching.map_or("-".into(), |m| m.to_string()),
                ],
            ];
            for e in &s.bounds.entries {
                let rel = match e.relation {
                    Relation::AtLeast => ">=",
                    Relation::AtMost => "<=",
                    Relation::Exactly => "=",
                };
                rows.push(vec![format!("k* {rel} {}", e.value), e.note.clone()]);
            }
            rows.push(vec!["k* interval".into(), interval]);
            table(&["property", "value"], &rows)
        }
    };
    emit(global, &text)?;
    Ok(SOLVED)
}

/// Writes to `--output` when given, else prints.
fn emit(global: &Global, text: &str) -> Result<(), Failure> {
    match &global.output {
        Some(p) => write_file(p, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

pub fn check_trace(global: &Global, path: &Path) -> Result<u8, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(FAILED, format!("cannot read {}: {e}", path.display())))?;
    let trace: Trace = serde_json::from_str(&text).map_err(|e| {
        Failure::new(FAILED, format!("{}: line {} column {}: {e}", path.display(), e.line(), e.column()))
    })?;
    match check(&trace) {
        Ok(s) => {
            match global.format {
                Format::Json => println!("{}", json(&s)),
                Format::Table => println!(
                    "valid: {} rounds, {} conversions, largest contraction {}",
                    s.rounds, s.conversions, s.max_contraction
                ),
            }
            Ok(SOLVED)
        }
        Err(v) => Err(Failure::new(FAILED, format!("invalid trace: {v}"))),
    }
}

fn outcome_code(outcome: &Outcome) -> u8 {
    match outcome {
        Outcome::Solved { .. } => SOLVED,
        Outcome::AdversaryCycle { .. } => CYCLE,
        Outcome::RoundLimit { .. } => ROUND_LIMIT,
    }
}

fn outcome_text(outcome: &Outcome) -> String {
    match outcome {
        Outcome::Solved { round } => format!("solved at round {round}"),
        Outcome::AdversaryCycle { period, repeat_round } => {
            format!("cycle period {period} (repeats at round {repeat_round})")
        }
        Outcome::RoundLimit { rounds } => format!("round limit {rounds}"),
    }
}

fn graph_source(arg: &str) -> GraphSource {
    if Path::new(arg).is_file() {
        GraphSource::File(arg.into())
    } else {
        GraphSource::Family(arg.into())
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(FAILED, format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        Failure::new(FAILED, format!("{}: line {} column {}: {e}", path.display(), e.line(), e.column()))
    })
}

#[derive(Serialize)]
struct Simulated<'a> {
    experiment: String,
    outcome: &'a Outcome,
    rounds: usize,
    conversions: usize,
    conversions_per_round: Vec<usize>,
    trace: Option<&'a Path>,
}

pub fn simulate(global: &Global, args: &SimulateArgs) -> Result<u8, Failure> {
    let (mut spec, base) = match &args.spec {
        Some(path) => {
            let spec: ExperimentSpec = read_json(path)?;
            (spec, path.parent().map(Path::to_path_buf))
        }
        None => {
            let graph = args.graph.as_deref().expect("clap requires --graph without --spec");
            let mut spec = ExperimentSpec::new("", &args.agents, &args.adversary, args.k);
            spec.graph = graph_source(graph);
            spec.k_source = args.sources;
            spec.placement = match args.placement {
                PlacementArg::Auto => SimPlacement::Auto,
                PlacementArg::Adversary => SimPlacement::Adversary,
                PlacementArg::Random => SimPlacement::Random,
                PlacementArg::Given => SimPlacement::Given {
                    sources: args.at_sources.clone(),
                    ignorant: args.at_ignorant.clone(),
                },
            };
            (spec, None)
        }
    };
    if let Some(seed) = global.seed {
        spec.seed = seed;
    }
    if let Some(r) = global.max_rounds {
        spec.max_rounds = r;
    }
    let trace = run_experiment(&spec, base.as_deref())?;
    let out: Option<PathBuf> = global.output.clone().or_else(|| {
        spec.trace_output
            .as_ref()
            .map(|p| base.as_ref().filter(|_| p.is_relative()).map_or(p.clone(), |b| b.join(p)))
    });
    if let Some(p) = &out {
        write_file(p, &trace.to_json_string())?;
    }
    let summary = Simulated {
        experiment: spec.label(),
        outcome: &trace.outcome,
        rounds: trace.rounds.len(),
        conversions: trace.conversions(),
        conversions_per_round: trace.rounds.iter().map(|r| r.conversions.len()).collect(),
        trace: out.as_deref(),
    };
    match global.format {
        Format::Json => println!("{}", json(&summary)),
        Format::Table => println!(
            "{}, conversions {}, per round {:?}",
            outcome_text(&trace.outcome),
            summary.conversions,
            summary.conversions_per_round
        ),
    }
    Ok(outcome_code(&trace.outcome))
}

/// Runs one listed experiment and checks its outcome and trace.
fn experiment_row(spec: &ExperimentSpec, base: Option<&Path>) -> Row {
    let expected = spec.expect.map_or("runs".to_string(), |e| {
        serde_json::to_value(e).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
    });
    let row = |actual: String, passed: bool| Row {
        suite: "experiments".into(),
        check: spec.label(),
        expected: expected.clone(),
        actual,
        passed,
    };
    let trace = match run_experiment(spec, base) {
        Ok(t) => t,
        Err(e) => return row(format!("error: {e}"), false),
    };
    if let Some(p) = &spec.trace_output {
        let p = base.filter(|_| p.is_relative()).map_or(p.clone(), |b| b.join(p));
        if let Err(e) = write_file(&p, &trace.to_json_string()) {
            return row(e.message, false);
        }
    }
    let actual = outcome_text(&trace.outcome);
    match check(&trace) {
        Err(v) => row(format!("{actual}; invalid trace: {v}"), false),
        Ok(_) => row(actual, spec.expect.map_or(true, |e| e.matches(&trace.outcome))),
    }
}

/// Experiments run on worker threads; rows keep the file's order.
fn run_experiments(specs: &[ExperimentSpec], base: Option<&Path>) -> Vec<Row> {
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;

    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Row>>> = specs.iter().map(|_| Mutex::new(None)).collect();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(specs.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(spec) = specs.get(i) else { break };
                *slots[i].lock().expect("slot lock") = Some(experiment_row(spec, base));
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().expect("slot lock").expect("every experiment ran"))
        .collect()
}

pub fn verify(global: &Global, suite: &str) -> Result<u8, Failure> {
    let path = Path::new(suite);
    let rows = if path.is_file() {
        let specs: Vec<ExperimentSpec> = read_json(path)?;
        run_experiments(&specs, path.parent())
    } else {
        run_suite(suite)?.rows
    };
    let text = match global.format {
        Format::Json => json(&rows),
        Format::Table => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.suite.clone(),
                        r.check.clone(),
                        r.expected.clone(),
                        r.actual.clone(),
                        if r.passed { "PASS" } else { "FAIL" }.into(),
                    ]
                })
                .collect();
            let failed = rows.iter().filter(|r| !r.passed).count();
            format!(
                "{}\n{} checks, {} failed",
                table(&["suite", "check", "expected", "actual", "result"], &cells),
                rows.len(),
                failed
            )
        }
    };
    emit(global, &text)?;
    Ok(if rows.iter().all(|r| r.passed) { SOLVED } else { FAILED })
}

#[derive(Serialize)]
struct PerK {
    k: usize,
    result: SolverResult,
}

#[derive(Serialize, Default)]
struct SolveReport {
    mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    k_star: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    results: Vec<PerK>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<Option<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    budget_exceeded: Option<String>,
}

#[derive(Serialize)]
struct TableLine {
    ignorant: Vec<usize>,
    sources: Vec<usize>,
    value: Option<u32>,
    /// Surviving edges that refute every agent move, where the adversary wins.
    #[serde(skip_serializing_if = "Option::is_none")]
    refuting_tree: Option<Vec<broadcast_core::graph::Edge>>,
}

fn write_table(
    g: &Graph,
    agents: usize,
    sources: usize,
    goal: usize,
    budget: &Budget,
    path: &Path,
) -> Result<(), SolverError> {
    let t = ValueTable::build(g, agents, sources, goal, Branching::SpanningTrees, budget)?;
    let mut lines = Vec::with_capacity(t.state_count());
    for (state, value) in t.entries() {
        let refuting_tree = match value {
            None => t.refuting_choice(&state)?,
            Some(_) => None,
        };
        let line = TableLine {
            ignorant: state.ignorant,
            sources: state.sources,
            value,
            refuting_tree,
        };
        lines.push(serde_json::to_string(&line).expect("table line serializes"));
    }
    write_file(path, &lines.join("\n")).map_err(|e| SolverError::Policy(e.message))
}

fn solver_failure(e: SolverError) -> Failure {
    match e {
        SolverError::Budget(_) => Failure::new(BUDGET, e.to_string()),
        other => Failure::new(FAILED, other.to_string()),
    }
}

pub fn solve(global: &Global, args: &SolveArgs) -> Result<u8, Failure> {
    let g = load_graph(&args.graph)?;
    let mut budget = Budget::default();
    if let Some(s) = global.budget_states {
        budget.max_states = s;
    }
    let given = || {
        if args.at_sources.is_empty() || args.at_ignorant.is_empty() {
            return Err(Failure::new(FAILED, "given placement needs --at-sources and --at-ignorant"));
        }
        Ok(broadcast_core::engine::Configuration::new(&args.at_sources, &args.at_ignorant))
    };
    let placement = match args.placement {
        SolvePlacement::Adversarial => Placement::Adversarial,
        SolvePlacement::AgentsChoose => Placement::AgentsChoose,
        SolvePlacement::Given => Placement::Given(given()?),
    };
    let s = args.sources;
    let mut report = SolveReport::default();
    // (agents, sources, goal) of the table behind the answer
    let mut table_shape = None;

    match args.mode {
        SolveMode::MinAgents | SolveMode::Win => {
            report.mode = if args.mode == SolveMode::Win { "win" } else { "min_agents" };
            let ks: Vec<usize> = match (&placement, args.mode) {
                (Placement::Given(_), _) => vec![args.at_ignorant.len()],
                (_, SolveMode::Win) => vec![args.k_max],
                _ => (args.k_min.max(1)..=args.k_max).collect(),
            };
            for k in ks {
                if !matches!(placement, Placement::Given(_)) && k + s > g.node_count() {
                    break;
                }
                match solve_placement(&g, k, s, &placement, &budget) {
                    Ok(result) => {
                        let win = result.agents_win();
                        table_shape = Some((k + s, s, k + s));
                        report.results.push(PerK { k, result });
                        if win && report.mode == "min_agents" {
                            report.k_star = Some(k);
                            break;
                        }
                    }
                    Err(SolverError::Budget(m)) => {
                        report.budget_exceeded = Some(format!("k = {k}: {m}"));
                        break;
                    }
                    Err(e) => return Err(solver_failure(e)),
                }
            }
        }
        SolveMode::Value => {
            report.mode = "value";
            let Placement::Given(cfg) = &placement else {
                return Err(Failure::new(FAILED, "value mode needs --placement given"));
            };
            let objective = match args.objective {
                ObjectiveArg::FirstNewSource => Objective::FirstNewSource,
                ObjectiveArg::AllSources => Objective::AllSources,
            };
            match game_value(&g, cfg, objective, &budget) {
                Ok(v) => {
                    report.value = Some(v);
                    let st = CanonicalState::of(cfg);
                    let goal = match objective {
                        Objective::FirstNewSource => st.sources.len() + 1,
                        Objective::AllSources => st.agents(),
                    };
                    table_shape = Some((st.agents(), st.sources.len(), goal));
                }
                Err(SolverError::Budget(m)) => report.budget_exceeded = Some(m),
                Err(e) => return Err(solver_failure(e)),
            }
        }
    }

    if let (Some(path), Some((agents, sources, goal))) = (&args.table, table_shape) {
        if report.budget_exceeded.is_none() {
            write_table(&g, agents, sources, goal, &budget, path).map_err(solver_failure)?;
        }
    }
    if let Some(p) = &global.output {
        write_file(p, &json(&report))?;
    }
    match global.format {
        Format::Json => println!("{}", json(&report)),
        Format::Table => println!("{}", solve_text(&report)),
    }
    Ok(if report.budget_exceeded.is_some() { BUDGET } else { SOLVED })
}

fn solve_text(report: &SolveReport) -> String {
    let mut out = Vec::new();
    if !report.results.is_empty() {
        let rows: Vec<Vec<String>> = report
            .results
            .iter()
            .map(|r| {
                vec![
                    r.k.to_string(),
                    format!("{:?}", r.result.winner).to_lowercase(),
                    r.result.optimal_rounds.map_or("-".into(), |v| v.to_string()),
                    r.result.states_explored.to_string(),
                    r.result.critical_state.as_ref().map_or("-".into(), |c| c.to_string()),
                ]
            })
            .collect();
        out.push(table(&["k", "winner", "rounds", "states", "deciding placement"], &rows));
    }
    match report.mode {
        "min_agents" if report.budget_exceeded.is_none() => out.push(match report.k_star {
            Some(k) => format!("k* = {k}"),
            None => "k* above the searched range".into(),
        }),
        "value" => {
            if let Some(v) = report.value {
                out.push(v.map_or("value: never".into(), |r| format!("value: {r} rounds")));
            }
        }
        _ => {}
    }
    if let Some(m) = &report.budget_exceeded {
        out.push(format!("budget exceeded ({m}); results above are partial"));
    }
    out.join("\n")
}
