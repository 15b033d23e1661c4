//! `broadcast`: build graphs, analyze them, play and solve the game.

mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "broadcast", version, about = "Broadcasting with mobile agents on dynamic graphs")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for randomized policies and placements.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Round limit for simulations.
    #[arg(long, global = true)]
    pub max_rounds: Option<usize>,
    /// State limit for the exact solver.
    #[arg(long, global = true)]
    pub budget_states: Option<usize>,
    /// Where to write the main artifact (graph, trace, solver result).
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    pub format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Table,
}

/// A graph file, or a family followed by its parameters:
/// `theta 3,3,3`, `lollipop k=2 path=8`, `grid 3x3` or `theta:3,3,3`.
#[derive(Args, Debug, Clone)]
pub struct GraphArg {
    pub graph: String,
    pub params: Vec<String>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementArg {
    Auto,
    Adversary,
    Random,
    Given,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolvePlacement {
    Adversarial,
    AgentsChoose,
    Given,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    /// Smallest winning number of ignorant agents in the k range.
    MinAgents,
    /// Who wins with exactly `--k-max` ignorant agents.
    Win,
    /// Minimax round count from a given placement.
    Value,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveArg {
    FirstNewSource,
    AllSources,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a family graph and write its JSON.
    Generate(GraphArg),
    /// Report density, connectivity, bonds and agent bounds.
    Analyze {
        #[command(flatten)]
        graph: GraphArg,
        /// Largest bond size enumerated.
        #[arg(long, default_value_t = 6)]
        bond_cap: usize,
    },
    /// Play one game and write its trace.
    Simulate(SimulateArgs),
    /// Decide the game exactly.
    Solve(SolveArgs),
    /// Run a named check suite or a JSON list of experiments.
    Verify {
        /// Suite name (`all` for every suite) or path to an experiment list.
        suite: String,
    },
    /// Re-validate a trace file independently of the engine.
    CheckTrace { trace: PathBuf },
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Experiment file; the flags below are ignored when given.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Graph file or family spec such as `grid:3x3`.
    #[arg(long, required_unless_present = "spec")]
    pub graph: Option<String>,
    #[arg(long, default_value = "toward_source")]
    pub agents: String,
    #[arg(long, default_value = "passive")]
    pub adversary: String,
    /// Ignorant agents.
    #[arg(short, long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 1)]
    pub sources: usize,
    #[arg(long, value_enum, default_value_t = PlacementArg::Auto)]
    pub placement: PlacementArg,
    /// Source nodes for `--placement given`.
    #[arg(long, value_delimiter = ',')]
    pub at_sources: Vec<usize>,
    /// Ignorant nodes for `--placement given`.
    #[arg(long, value_delimiter = ',')]
    pub at_ignorant: Vec<usize>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub graph: GraphArg,
    #[arg(long, value_enum, default_value_t = SolveMode::MinAgents)]
    pub mode: SolveMode,
    #[arg(long, default_value_t = 1)]
    pub k_min: usize,
    #[arg(long, default_value_t = 4)]
    pub k_max: usize,
    #[arg(long, default_value_t = 1)]
    pub sources: usize,
    #[arg(long, value_enum, default_value_t = SolvePlacement::Adversarial)]
    pub placement: SolvePlacement,
    #[arg(long, value_delimiter = ',')]
    pub at_sources: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub at_ignorant: Vec<usize>,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::FirstNewSource)]
    pub objective: ObjectiveArg,
    /// Also write the solved state table, one JSON object per line.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let result = match cli.command {
        Command::Generate(graph) => commands::generate(g, &graph),
        Command::Analyze { graph, bond_cap } => commands::analyze(g, &graph, bond_cap),
        Command::Simulate(args) => commands::simulate(g, &args),
        Command::Solve(args) => commands::solve(g, &args),
        Command::Verify { suite } => commands::verify(g, &suite),
        Command::CheckTrace { trace } => commands::check_trace(g, &trace),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
