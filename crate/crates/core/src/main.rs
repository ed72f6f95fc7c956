use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dodona::graph;
use dodona::interp::{EvalError, Program};
use dodona::oracle::{self, Oracle, RemoteOracle, ReplayOracle, SearchOracle, UniformOracle};
use dodona::report;
use dodona::search::{self, Outcome, SearchConfig, SearchError, SearchStats};
use dodona::suite::{self, Family, SuiteConfig};

// Writes to stdout, ignoring a closed pipe.
macro_rules! out {
    ($($arg:tt)*) => {{
        let _ = writeln!(io::stdout(), $($arg)*);
    }};
}

const EXIT_OTHER: u8 = 1;
const EXIT_PARSE: u8 = 3;
const EXIT_RUNTIME: u8 = 4;
const EXIT_FAILURE: u8 = 5;
const EXIT_BUDGET: u8 = 6;
const EXIT_ORACLE: u8 = 7;

/// Largest tolerated share of failed oracle queries during `eval`.
const MAX_ORACLE_FAILURE_RATE: f64 = 0.01;

#[derive(Parser, Serialize)]
#[command(name = "dodona", version, about = "Oracle-guided decision programming")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "subcommand")]
enum Command {
    /// Run a program along one path and print its value and choice trace.
    Run(RunArgs),
    /// Search a program's decision tree for a successful leaf.
    Search(SearchArgs),
    /// Generate the task suite dataset.
    Gen(GenArgs),
    /// Score an oracle on a generated dataset.
    Eval(EvalArgs),
    /// Replay a dataset and check every stored graph.
    Verify(VerifyArgs),
    /// Serve an oracle over the wire protocol on stdin/stdout.
    #[command(hide = true)]
    Serve(ServeArgs),
}

#[derive(Args, Serialize)]
struct Budgets {
    /// Interpreter steps per rollout (per transition for searches).
    #[arg(long)]
    budget_steps: Option<u64>,
    /// Search nodes to expand.
    #[arg(long, default_value_t = 10_000)]
    budget_nodes: usize,
}

impl Budgets {
    fn steps(&self) -> u64 {
        self.budget_steps.unwrap_or_else(dodona::interp::default_step_budget)
    }
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Policy {
    First,
    Last,
}

#[derive(Args, Serialize)]
struct RunArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = Policy::First)]
    policy: Policy,
    /// Comma-separated choice indices; overrides --policy.
    #[arg(long, value_delimiter = ',')]
    trace: Option<Vec<usize>>,
    #[command(flatten)]
    budgets: Budgets,
    /// Write a run manifest to this path.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Algo {
    Bfs,
    Mcts,
}

#[derive(Args, Serialize)]
struct SearchArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = Algo::Bfs)]
    algo: Algo,
    #[command(flatten)]
    oracle: OracleArgs,
    #[command(flatten)]
    budgets: Budgets,
    #[arg(long, default_value_t = 2000)]
    simulations: usize,
    #[arg(long, default_value_t = 1.0)]
    c_puct: f64,
    #[arg(long, default_value_t = graph::DEFAULT_NODE_LIMIT)]
    graph_node_limit: usize,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct OracleArgs {
    /// uniform, exec:<cmd>, tcp:<host:port>, replay:<dataset dir> or
    /// adversarial:<dataset dir>.
    #[arg(long, default_value = "uniform")]
    oracle: String,
    /// Probability a replay oracle puts on its target choice.
    #[arg(long, default_value_t = 0.99)]
    confidence: f64,
}

#[derive(Args, Serialize)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated family names; all families by default.
    #[arg(long, value_delimiter = ',')]
    families: Option<Vec<String>>,
    #[arg(long, default_value_t = suite::DEFAULT_MAX_RESULTS)]
    max_results: usize,
    /// Train, valid and test weights.
    #[arg(long, value_delimiter = ',', default_value = "70,10,20")]
    split: Vec<u32>,
    #[arg(long, default_value_t = graph::DEFAULT_NODE_LIMIT)]
    graph_node_limit: usize,
    #[command(flatten)]
    budgets: Budgets,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Part {
    Train,
    Valid,
    Test,
    All,
}

#[derive(Args, Serialize)]
struct EvalArgs {
    dataset: PathBuf,
    #[command(flatten)]
    oracle: OracleArgs,
    /// Which split to score.
    #[arg(long, value_enum, default_value_t = Part::Test)]
    part: Part,
    /// Directory for metrics.csv, metrics.svg and manifest.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    dataset: PathBuf,
    #[command(flatten)]
    budgets: Budgets,
    /// Write the report and a manifest into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ServeArgs {
    #[command(flatten)]
    oracle: OracleArgs,
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl ToString) -> Failure {
    Failure {
        code,
        message: message.to_string(),
    }
}

impl From<dodona::Error> for Failure {
    fn from(e: dodona::Error) -> Failure {
        let code = match &e {
            dodona::Error::Read(_) => EXIT_PARSE,
            dodona::Error::Eval(EvalError::BudgetExceeded(_)) => EXIT_BUDGET,
            dodona::Error::Eval(_) => EXIT_RUNTIME,
            _ => EXIT_OTHER,
        };
        fail(code, e)
    }
}

impl From<SearchError> for Failure {
    fn from(e: SearchError) -> Failure {
        let code = match &e {
            SearchError::Eval(EvalError::BudgetExceeded(_)) => EXIT_BUDGET,
            SearchError::Oracle(_) | SearchError::MalformedScore(_) => EXIT_ORACLE,
            _ => EXIT_RUNTIME,
        };
        fail(code, e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Failure {
        fail(EXIT_OTHER, e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Failure {
        fail(EXIT_OTHER, e)
    }
}

fn git_revision() -> String {
    std::process::Command::new("git")
        .args(["rev-parse", "HEAD"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_owned())
        .unwrap_or_else(|| "unknown".into())
}

fn write_manifest(path: &Path, cli: &Cli) -> Result<(), Failure> {
    let manifest = serde_json::json!({
        "tool": "dodona",
        "version": env!("CARGO_PKG_VERSION"),
        "git_revision": git_revision(),
        "graph_format_version": graph::GRAPH_FORMAT_VERSION,
        "edge_vocab_version": graph::EDGE_VOCAB_VERSION,
        "token_vocab_version": graph::TOKEN_VOCAB_VERSION,
        "run_config": cli.command,
    });
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

fn load_program(path: &Path) -> Result<Program, Failure> {
    let src = fs::read_to_string(path).map_err(|e| fail(EXIT_OTHER, format!("{}: {e}", path.display())))?;
    let mut p = suite::stdlib()?;
    p.load(&src)?;
    if p.main().is_none() {
        return Err(fail(EXIT_PARSE, format!("{}: no expression to evaluate", path.display())));
    }
    Ok(p)
}

fn make_oracle(args: &OracleArgs) -> Result<Box<dyn Oracle>, Failure> {
    let spec = args.oracle.as_str();
    if spec == "uniform" {
        return Ok(Box::new(UniformOracle));
    }
    for (prefix, adversarial) in [("replay:", false), ("adversarial:", true)] {
        if let Some(dir) = spec.strip_prefix(prefix) {
            if !(0.0..=1.0).contains(&args.confidence) {
                return Err(fail(EXIT_OTHER, "--confidence must be within [0, 1]"));
            }
            let points = suite::read_datapoints(Path::new(dir))?;
            return Ok(Box::new(ReplayOracle::new(&points, args.confidence, adversarial)));
        }
    }
    if spec.starts_with("exec:") || spec.starts_with("tcp:") {
        return Ok(Box::new(RemoteOracle::connect(spec).map_err(|e| fail(EXIT_ORACLE, e))?));
    }
    Err(fail(EXIT_OTHER, format!("unknown oracle {spec:?}")))
}

fn outcome_code(outcome: &Outcome) -> u8 {
    match outcome {
        Outcome::Success { .. } => 0,
        Outcome::Failure { .. } => EXIT_FAILURE,
        Outcome::BudgetExceeded => EXIT_BUDGET,
    }
}

fn cmd_run(args: &RunArgs) -> Result<u8, Failure> {
    let p = load_program(&args.file)?;
    let main = p.main().expect("checked in load_program");
    let outcome = match &args.trace {
        Some(trace) => search::replay(main, p.env(), trace, args.budgets.steps())?,
        None => {
            let policy = args.policy;
            search::rollout(
                main,
                p.env(),
                |cp| match policy {
                    Policy::First => 0,
                    Policy::Last => cp.choices.len() - 1,
                },
                args.budgets.steps(),
            )?
        }
    };
    match &outcome {
        Outcome::Success { value, trace } => {
            out!("{value}");
            out!("trace: {trace:?}");
        }
        Outcome::Failure { trace } => {
            eprintln!("failure");
            out!("trace: {trace:?}");
        }
        Outcome::BudgetExceeded => eprintln!("step budget exceeded"),
    }
    Ok(outcome_code(&outcome))
}

#[derive(Serialize)]
struct SearchReport {
    outcome: &'static str,
    value: Option<String>,
    trace: Option<Vec<usize>>,
    stats: SearchStats,
}

fn cmd_search(args: &SearchArgs) -> Result<u8, Failure> {
    let p = load_program(&args.file)?;
    let main = p.main().expect("checked in load_program");
    let oracle = make_oracle(&args.oracle)?;
    let adapter = SearchOracle::new(oracle.as_ref(), args.graph_node_limit);
    let config = SearchConfig {
        step_budget: args.budgets.steps(),
        node_budget: args.budgets.budget_nodes,
        simulations: args.simulations,
        c_puct: args.c_puct,
        record_events: false,
    };
    let mut result = match args.algo {
        Algo::Bfs => search::best_first(main, p.env(), |cp| adapter.score(cp), &config)?,
        Algo::Mcts => search::mcts(main, p.env(), |cp| Ok(adapter.policy_value(cp)), &config)?,
    };
    result.stats.oracle_failures = adapter.failure_count();
    let outcome = &result.outcome;
    let report = SearchReport {
        outcome: match outcome {
            Outcome::Success { .. } => "success",
            Outcome::Failure { .. } => "failure",
            Outcome::BudgetExceeded => "budget-exceeded",
        },
        value: outcome.value().map(|v| v.to_string()),
        trace: outcome.trace().map(<[usize]>::to_vec),
        stats: result.stats.clone(),
    };
    out!("{}", serde_json::to_string(&report)?);
    Ok(outcome_code(outcome))
}

fn parse_families(names: &Option<Vec<String>>) -> Result<Vec<Family>, Failure> {
    let Some(names) = names else {
        return Ok(Family::ALL.to_vec());
    };
    let names: Vec<&str> = names.iter().map(|s| s.trim()).filter(|s| !s.is_empty()).collect();
    if names.is_empty() {
        return Err(fail(EXIT_OTHER, "--families selects no families"));
    }
    names
        .into_iter()
        .map(|n| {
            Family::from_name(n).ok_or_else(|| {
                let known: Vec<&str> = Family::ALL.iter().map(|f| f.name()).collect();
                fail(EXIT_OTHER, format!("unknown family {n:?}; known: {}", known.join(", ")))
            })
        })
        .collect()
}

fn cmd_gen(cli: &Cli, args: &GenArgs) -> Result<u8, Failure> {
    let split: [u32; 3] = args
        .split
        .as_slice()
        .try_into()
        .ok()
        .filter(|s: &[u32; 3]| s.iter().sum::<u32>() > 0)
        .ok_or_else(|| fail(EXIT_OTHER, "--split takes three non-negative weights, e.g. 70,10,20"))?;
    let config = SuiteConfig {
        seed: args.seed,
        families: parse_families(&args.families)?,
        max_results: args.max_results,
        step_budget: args.budgets.steps(),
        node_limit: args.graph_node_limit,
        split,
    };
    let suite = suite::gen_suite(&config).map_err(|e| fail(EXIT_RUNTIME, e))?;
    suite::write_suite(&suite, &args.out)?;
    write_manifest(&args.out.join("manifest.json"), cli)?;
    eprintln!(
        "{} tasks, {} datapoints ({} train / {} valid / {} test tasks) written to {}",
        suite.tasks.len(),
        suite.datapoints.len(),
        suite.split.train.len(),
        suite.split.valid.len(),
        suite.split.test.len(),
        args.out.display()
    );
    Ok(0)
}

fn check_versions(m: &suite::Manifest) -> Result<(), Failure> {
    let ours = (
        suite::SUITE_FORMAT_VERSION,
        graph::GRAPH_FORMAT_VERSION,
        graph::EDGE_VOCAB_VERSION,
        graph::TOKEN_VOCAB_VERSION,
    );
    let theirs = (m.format_version, m.graph_format_version, m.edge_vocab_version, m.token_vocab_version);
    if ours != theirs {
        return Err(fail(EXIT_OTHER, format!("dataset versions {theirs:?} do not match {ours:?}")));
    }
    Ok(())
}

fn cmd_eval(cli: &Cli, args: &EvalArgs) -> Result<u8, Failure> {
    let manifest = suite::read_manifest(&args.dataset)?;
    check_versions(&manifest)?;
    let points = match args.part {
        Part::All => suite::read_datapoints(&args.dataset)?,
        part => {
            let name = match part {
                Part::Train => "train",
                Part::Valid => "valid",
                _ => "test",
            };
            dodona::dataset::read_jsonl(&args.dataset.join(format!("{name}.jsonl")))?
        }
    };
    let oracle = make_oracle(&args.oracle)?;
    let eval = oracle::evaluate(&points, oracle.as_ref());
    let rate = eval.oracle_failures as f64 / eval.queries.max(1) as f64;
    if rate > MAX_ORACLE_FAILURE_RATE {
        return Err(fail(
            EXIT_ORACLE,
            format!("{} of {} oracle queries failed; aborting", eval.oracle_failures, eval.queries),
        ));
    }
    let rows = report::rows(&eval);
    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("metrics.csv"), report::csv(&rows))?;
    fs::write(args.out.join("metrics.svg"), report::svg(&rows))?;
    write_manifest(&args.out.join("manifest.json"), cli)?;
    for r in &rows {
        out!("{:<40} {:>10.4} {:>8}", r.task_id, r.metric, r.datapoints);
    }
    if eval.oracle_failures > 0 {
        eprintln!("{} of {} oracle queries failed", eval.oracle_failures, eval.queries);
    }
    Ok(0)
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> Result<u8, Failure> {
    let manifest = suite::read_manifest(&args.dataset)?;
    check_versions(&manifest)?;
    let tasks: Vec<suite::TaskSpec> = manifest.tasks.into_iter().map(|t| t.spec).collect();
    let points = suite::read_datapoints(&args.dataset)?;
    let step_budget = args.budgets.budget_steps.unwrap_or(manifest.config.step_budget);
    let report = suite::verify_suite(&tasks, &points, step_budget, manifest.config.node_limit);
    for (id, t) in &report.tasks {
        out!("{:<40} {:>4} episodes {:>6} datapoints {:>6.2} mean choices", id, t.episodes, t.datapoints, t.mean_choices);
    }
    for f in &report.failures {
        eprintln!("FAIL {} episode {}: {}", f.task_id, f.episode, f.reason);
    }
    if let Some(out) = &args.out {
        fs::create_dir_all(out)?;
        fs::write(out.join("verify.json"), serde_json::to_string_pretty(&report)? + "\n")?;
        write_manifest(&out.join("manifest.json"), cli)?;
    }
    Ok(if report.passed() { 0 } else { EXIT_FAILURE })
}

fn cmd_serve(args: &ServeArgs) -> Result<u8, Failure> {
    let oracle = make_oracle(&args.oracle)?;
    let stdin = io::stdin();
    let input: Box<dyn BufRead> = Box::new(stdin.lock());
    oracle::serve(oracle.as_ref(), input, io::stdout().lock()).map_err(|e| fail(EXIT_ORACLE, e))?;
    Ok(0)
}

fn dispatch(cli: &Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Run(a) => {
            let code = cmd_run(a)?;
            if let Some(m) = &a.manifest {
                write_manifest(m, cli)?;
            }
            Ok(code)
        }
        Command::Search(a) => {
            let code = cmd_search(a)?;
            if let Some(m) = &a.manifest {
                write_manifest(m, cli)?;
            }
            Ok(code)
        }
        Command::Gen(a) => cmd_gen(cli, a),
        Command::Eval(a) => cmd_eval(cli, a),
        Command::Verify(a) => cmd_verify(cli, a),
        Command::Serve(a) => cmd_serve(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("dodona: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
