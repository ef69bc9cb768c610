mod commands;
mod inputs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use plancomp::ingest::LogFormat;
use plancomp::stats::GroupField;

#[derive(Parser)]
#[command(name = "plancomp", version, about = "Plan-compliance analytics for agent trajectories")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Global {
    /// Plan setting name (e.g. standard, no_plan) or path to a JSON plan spec.
    #[arg(long, global = true)]
    pub plan: Option<String>,
    /// JSON classifier rulebook overriding the defaults.
    #[arg(long, global = true)]
    pub classifier_config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "plancomp-out")]
    pub out: PathBuf,
    /// Input log format.
    #[arg(long, global = true, default_value = "canonical", value_parser = parse_format)]
    pub format: LogFormat,
    /// Comma-separated grouping / stratification fields: model, setting, difficulty, resolved.
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_field)]
    pub by: Vec<GroupField>,
    /// Phase-flow stage horizon.
    #[arg(long, global = true, default_value_t = 8)]
    pub stages: usize,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true, default_value_t = default_jobs())]
    pub jobs: usize,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn parse_format(s: &str) -> Result<LogFormat, String> {
    s.parse().map_err(|e: plancomp::Error| e.to_string())
}

fn parse_field(s: &str) -> Result<GroupField, String> {
    s.parse().map_err(|e: plancomp::Error| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Parse raw logs and write them back in the canonical format.
    Ingest { inputs: Vec<PathBuf> },
    /// Score trajectories against a plan.
    Score { inputs: Vec<PathBuf> },
    /// Aggregate phase flows and render a Sankey diagram.
    Flow { inputs: Vec<PathBuf> },
    /// Export action graphs and their node/edge/loop counts.
    Graph { inputs: Vec<PathBuf> },
    /// Plan-setting prompt variants.
    Variants {
        #[command(subcommand)]
        action: VariantsAction,
    },
    /// Compare two score files with a statistical test.
    Compare(CompareArgs),
    /// Resolved-instance intersections across plan settings.
    Intersect(IntersectArgs),
    /// Consolidated text and CSV report from earlier outputs.
    Report(ReportArgs),
}

#[derive(Subcommand)]
pub enum VariantsAction {
    /// Print the plan-setting catalogue.
    List,
    /// Render one prompt per setting into the output directory.
    Emit {
        /// Base prompt containing the `{{PLAN}}` marker.
        #[arg(long)]
        base: Option<PathBuf>,
        /// JSON object mapping setting names to replacement plan text.
        #[arg(long)]
        templates: Option<PathBuf>,
        /// Trajectory length for which reminder positions are listed.
        #[arg(long, default_value_t = 25)]
        length: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestKind {
    Mannwhitney,
    Mcnemar,
    Pearson,
}

#[derive(Args)]
pub struct CompareArgs {
    /// First score file (JSONL written by `score`).
    #[arg(long)]
    pub a: PathBuf,
    /// Second score file; not used by `pearson`.
    #[arg(long)]
    pub b: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub test: TestKind,
    /// Metric compared: ppc, poc, ppf, pc, nc, tec, lc or resolved.
    #[arg(long, default_value = "pc")]
    pub metric: String,
    /// Second variable for `pearson`.
    #[arg(long, default_value = "resolved")]
    pub against: String,
}

#[derive(Args)]
pub struct IntersectArgs {
    /// Score files, one per setting; `name=path` overrides the setting name.
    #[arg(long, num_args = 1.., required = true)]
    pub settings: Vec<String>,
    /// Repeated runs of one setting; only instances with the same outcome in
    /// every run are kept.
    #[arg(long, num_args = 2..)]
    pub deterministic_runs: Vec<PathBuf>,
}

#[derive(Args)]
pub struct ReportArgs {
    /// Score file written by `score`.
    #[arg(long)]
    pub scores: PathBuf,
    /// Intersection CSV written by `intersect`.
    #[arg(long)]
    pub intersection: Option<PathBuf>,
    /// Test result files written by `compare`.
    #[arg(long, num_args = 1..)]
    pub tests: Vec<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let result = match cli.command {
        Command::Ingest { inputs } => commands::ingest(g, &inputs),
        Command::Score { inputs } => commands::score(g, &inputs),
        Command::Flow { inputs } => commands::flow(g, &inputs),
        Command::Graph { inputs } => commands::graph(g, &inputs),
        Command::Variants { action } => commands::variants(g, action),
        Command::Compare(args) => commands::compare(g, &args),
        Command::Intersect(args) => commands::intersect(g, &args),
        Command::Report(args) => commands::report(g, &args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
