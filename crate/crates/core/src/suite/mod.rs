//! The synthetic task suite: choosers, task families, episode generation,
//! splitting and verification.
//!
//! A task pairs a function with a pool of arguments (`choose-func-arg`),
//! a chooser for the function's output type (`choose-output`) and its
//! inverse (`invert-output`). Each (function, argument) pair is one episode:
//! the labels `(invert-output (fn arg))` drive
//! `(if (= (choose-output) (fn arg)) #t (fail))` to success, and every
//! choicepoint on the way becomes a datapoint. Planted-path tasks instead
//! run a walker over the argument.

pub mod families;
pub mod terms;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use thiserror::Error;

use crate::dataset::{self, Datapoint};
use crate::expr::Expr;
use crate::graph::{self, build_choicepoint_graph, ChoiceGraph, GraphError};
use crate::interp::{resume, run_deterministic, step, Budget, Continuation, EvalError, Program, StepResult};
use crate::rng::SplitMix64;
use crate::search::enumerate;
use crate::value::{Env, Symbol, Value};

pub const STDLIB: &str = include_str!("stdlib.dd");
pub const FAMILY_LIB: &str = include_str!("families.dd");
pub const SUITE_FORMAT_VERSION: u32 = 1;
pub const DEFAULT_MAX_RESULTS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Identity,
    Arithmetic,
    Lists,
    Trees,
    Polynomials,
    FirstOrder,
    HigherOrder,
    PlantedPath,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Identity,
        Family::Arithmetic,
        Family::Lists,
        Family::Trees,
        Family::Polynomials,
        Family::FirstOrder,
        Family::HigherOrder,
        Family::PlantedPath,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Identity => "identity",
            Family::Arithmetic => "arithmetic",
            Family::Lists => "lists",
            Family::Trees => "trees",
            Family::Polynomials => "polynomials",
            Family::FirstOrder => "first-order",
            Family::HigherOrder => "higher-order",
            Family::PlantedPath => "planted-path",
        }
    }

    pub fn from_name(name: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpisodeKind {
    /// `(if (= (choose-output) (fn arg)) #t (fail))`
    Predict,
    /// `(walker arg)`
    Walk,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task_id: String,
    pub family: Family,
    pub episode: EpisodeKind,
    /// Task-specific definitions, loaded after the shared libraries.
    pub source: String,
    pub max_results: usize,
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("task {task}: {reason}")]
    Task { task: String, reason: String },
    #[error("task {task}, episode {episode}: {reason}")]
    Episode {
        task: String,
        episode: usize,
        reason: String,
    },
    #[error("{0}")]
    Config(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub families: Vec<Family>,
    pub max_results: usize,
    pub step_budget: u64,
    pub node_limit: usize,
    /// Train/valid/test weights.
    pub split: [u32; 3],
}

impl Default for SuiteConfig {
    fn default() -> SuiteConfig {
        SuiteConfig {
            seed: 0,
            families: Family::ALL.to_vec(),
            max_results: DEFAULT_MAX_RESULTS,
            step_budget: crate::interp::default_step_budget(),
            node_limit: graph::DEFAULT_NODE_LIMIT,
            split: [70, 10, 20],
        }
    }
}

/// The shared library text loaded before every task.
pub fn library_source() -> String {
    format!("{STDLIB}\n{FAMILY_LIB}")
}

/// A program with the libraries loaded.
pub fn stdlib() -> Result<Program, crate::Error> {
    Program::from_source(&library_source())
}

pub fn load_task(task: &TaskSpec) -> Result<Program, SuiteError> {
    let mut p = stdlib().map_err(|e| task_err(&task.task_id, e))?;
    p.load(&task.source).map_err(|e| task_err(&task.task_id, e))?;
    Ok(p)
}

fn task_err(task: &str, reason: impl ToString) -> SuiteError {
    SuiteError::Task {
        task: task.to_owned(),
        reason: reason.to_string(),
    }
}

fn episode_err(task: &str, episode: usize, reason: impl ToString) -> SuiteError {
    SuiteError::Episode {
        task: task.to_owned(),
        episode,
        reason: reason.to_string(),
    }
}

/// Fixes a draft's argument pool and renders its source.
fn finalize(d: families::Draft, seed: u64, max_results: usize, step_budget: u64) -> Result<TaskSpec, SuiteError> {
    let task_id = format!("{}/{}", d.family.name(), d.name);
    let mut program = stdlib().map_err(|e| task_err(&task_id, e))?;
    program.load(&d.defs).map_err(|e| task_err(&task_id, e))?;
    let mut rng = SplitMix64::stream(seed, &task_id);
    let wrap = |datum: &Value| match d.arg_wrap {
        Some(w) => format!("(task-fn ({w} '{datum}))"),
        None => format!("(task-fn '{datum})"),
    };
    let accepted = |datum: &Value| -> bool {
        let Ok(expr) = program.parse_expr(&wrap(datum)) else {
            return false;
        };
        match run_deterministic(&expr, program.env(), &mut Budget::new(step_budget)) {
            Ok(target) => (d.accept)(&target),
            Err(_) => false,
        }
    };
    let mut pool: Vec<Value> = Vec::new();
    let mut seen = HashSet::new();
    match (&d.fixed_args, &d.gen_arg) {
        (Some(args), _) => {
            for a in args.iter().take(max_results) {
                if accepted(a) {
                    pool.push(a.clone());
                }
            }
        }
        (None, Some(gen)) => {
            let mut attempts = 0;
            while pool.len() < max_results && attempts < max_results * 40 {
                attempts += 1;
                let a = gen(&mut rng);
                if seen.insert(a.clone()) && accepted(&a) {
                    pool.push(a);
                }
            }
        }
        (None, None) => return Err(task_err(&task_id, "draft has no arguments")),
    }
    if pool.is_empty() {
        return Err(task_err(&task_id, "no admissible arguments"));
    }
    let pool_text = Value::list(pool).to_string();
    let arg_expr = match d.arg_wrap {
        Some(w) => format!("({w} (choose '{pool_text}))"),
        None => format!("(choose '{pool_text})"),
    };
    let mut source = format!("; {task_id}\n{}\n", d.defs);
    let episode = if let Some(walker) = d.walker {
        source.push_str(&format!("(define (walker t) ({walker} t))\n"));
        EpisodeKind::Walk
    } else {
        EpisodeKind::Predict
    };
    if let Some(chooser) = d.output.chooser() {
        source.push_str(&format!("(define (choose-output) {chooser})\n"));
    }
    source.push_str(&format!("(define (invert-output v) {})\n", d.output.inverse()));
    source.push_str(&format!("(define (choose-func-arg) (list task-fn {arg_expr}))\n"));
    Ok(TaskSpec {
        task_id,
        family: d.family,
        episode,
        source,
        max_results,
        seed,
    })
}

/// Task specs for the selected families, in family order.
pub fn task_specs(cfg: &SuiteConfig) -> Result<Vec<TaskSpec>, SuiteError> {
    if cfg.families.is_empty() {
        return Err(SuiteError::Config("no families selected".into()));
    }
    let mut families = cfg.families.clone();
    families.sort();
    families.dedup();
    let drafts: Vec<families::Draft> = families
        .iter()
        .flat_map(|&f| families::drafts(f, &mut SplitMix64::stream(cfg.seed, f.name())))
        .collect();
    drafts
        .into_par_iter()
        .map(|d| finalize(d, cfg.seed, cfg.max_results, cfg.step_budget))
        .collect()
}

/// How an episode picks its choices.
enum Picks<'a> {
    /// Choice values, matched against each choicepoint's choices.
    Labels(Vec<Value>),
    /// Choice indices.
    Indices(&'a [usize]),
}

pub struct Decision {
    pub graph: ChoiceGraph,
    pub correct: usize,
}

fn episode_program(program: &Program, task: &TaskSpec, fn_arg: &Value) -> Result<(Expr, Env), String> {
    let items = fn_arg
        .list_to_vec()
        .filter(|v| v.len() == 2)
        .ok_or_else(|| format!("choose-func-arg returned {fn_arg}, expected (fn arg)"))?;
    let env = program
        .env()
        .extend(vec![Symbol::new("fn"), Symbol::new("arg")], items)
        .map_err(|e| e.to_string())?;
    let text = match task.episode {
        EpisodeKind::Predict => "(if (= (choose-output) (fn arg)) #t (fail))",
        EpisodeKind::Walk => "(walker arg)",
    };
    Ok((program.parse_expr(text).map_err(|e| e.to_string())?, env))
}

fn labels(program: &Program, fn_arg: &Value, step_budget: u64) -> Result<Vec<Value>, String> {
    let items = fn_arg.list_to_vec().unwrap_or_default();
    let call = Expr::app(items.into_iter().map(Expr::Const).collect());
    let target = run_deterministic(&call, program.env(), &mut Budget::new(step_budget)).map_err(|e| e.to_string())?;
    let inv = program
        .lookup("invert-output")
        .ok_or("task does not define invert-output")?;
    let labels = run_deterministic(
        &Expr::app(vec![Expr::Const(inv), Expr::Const(target.clone())]),
        program.env(),
        &mut Budget::new(step_budget),
    )
    .map_err(|e| e.to_string())?;
    labels
        .list_to_vec()
        .ok_or_else(|| format!("invert-output of {target} returned {labels}, not a list"))
}

/// Runs one episode, recording the graph and chosen index at every
/// choicepoint. The episode must end in `#t` with every pick consumed.
fn drive(expr: &Expr, env: &Env, picks: Picks<'_>, step_budget: u64, node_limit: usize) -> Result<Vec<Decision>, String> {
    let mut budget = Budget::new(step_budget);
    let mut decisions = Vec::new();
    let mut state = step(expr.clone(), env.clone(), 0, Continuation::new(), &mut budget).map_err(|e| e.to_string())?;
    loop {
        let cp = match state {
            StepResult::Terminal(Value::Bool(true)) => break,
            StepResult::Terminal(v) => return Err(format!("episode ended with {v}, expected #t")),
            StepResult::Suspended(cp) => cp,
        };
        if cp.is_failure() {
            return Err(format!("episode failed after {} decisions", decisions.len()));
        }
        let k = decisions.len();
        let index = match &picks {
            Picks::Labels(ls) => {
                let label = ls.get(k).ok_or("ran out of labels")?;
                cp.choices
                    .iter()
                    .position(|c| c == label)
                    .ok_or_else(|| format!("label {label} is not among the choices at decision {k}"))?
            }
            Picks::Indices(ix) => {
                let i = *ix.get(k).ok_or("ran out of recorded decisions")?;
                if i >= cp.choices.len() {
                    return Err(format!("index {i} out of range at decision {k}"));
                }
                i
            }
        };
        let graph = build_choicepoint_graph(&cp, node_limit).map_err(|e: GraphError| e.to_string())?;
        decisions.push(Decision { graph, correct: index });
        state = resume(&cp, index, &mut budget).map_err(|e: EvalError| e.to_string())?;
    }
    let expected = match &picks {
        Picks::Labels(ls) => ls.len(),
        Picks::Indices(ix) => ix.len(),
    };
    if decisions.len() != expected {
        return Err(format!("{} picks given but {} decisions made", expected, decisions.len()));
    }
    Ok(decisions)
}

/// The (fn arg) pairs of a task, in enumeration order.
pub fn episodes_of(program: &Program, task: &TaskSpec, step_budget: u64) -> Result<Vec<Value>, SuiteError> {
    let expr = program
        .parse_expr("(choose-func-arg)")
        .map_err(|e| task_err(&task.task_id, e))?;
    let en = enumerate(&expr, program.env(), task.max_results, step_budget).map_err(|e| task_err(&task.task_id, e))?;
    if en.truncated {
        return Err(task_err(&task.task_id, "step budget exhausted while enumerating choose-func-arg"));
    }
    Ok(en.results.into_iter().map(|(v, _)| v).collect())
}

/// Generates every datapoint of `task`.
pub fn predict_app(task: &TaskSpec, step_budget: u64, node_limit: usize) -> Result<Vec<Datapoint>, SuiteError> {
    let program = load_task(task)?;
    let mut out = Vec::new();
    for (k, fn_arg) in episodes_of(&program, task, step_budget)?.iter().enumerate() {
        let fail = |e: String| episode_err(&task.task_id, k, e);
        let (expr, env) = episode_program(&program, task, fn_arg).map_err(fail)?;
        let ls = labels(&program, fn_arg, step_budget).map_err(fail)?;
        let decisions = drive(&expr, &env, Picks::Labels(ls), step_budget, node_limit).map_err(fail)?;
        for (i, d) in decisions.into_iter().enumerate() {
            out.push(Datapoint {
                task_id: task.task_id.clone(),
                episode: k,
                decision: i,
                num_choices: d.graph.choices.len(),
                correct: d.correct,
                graph: RawValue::from_string(d.graph.to_json()).expect("graph json is valid"),
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteSplit {
    pub train: Vec<String>,
    pub valid: Vec<String>,
    pub test: Vec<String>,
}

/// Splits task ids by the given weights after a seeded shuffle. Valid and
/// train sizes are rounded; test takes the rest.
pub fn split_tasks(ids: &[String], seed: u64, weights: [u32; 3]) -> SuiteSplit {
    let mut ids = ids.to_vec();
    ids.sort();
    SplitMix64::stream(seed, "split").shuffle(&mut ids);
    let total: u32 = weights.iter().sum();
    let n = ids.len();
    let share = |w: u32| ((n as f64) * f64::from(w) / f64::from(total.max(1))).round() as usize;
    let train = share(weights[0]).min(n);
    let valid = share(weights[1]).min(n - train);
    let mut it = ids.into_iter();
    let train: Vec<String> = it.by_ref().take(train).collect();
    let valid: Vec<String> = it.by_ref().take(valid).collect();
    SuiteSplit {
        train,
        valid,
        test: it.collect(),
    }
}

pub struct Suite {
    pub config: SuiteConfig,
    pub tasks: Vec<TaskSpec>,
    /// Sorted by (task, episode, decision).
    pub datapoints: Vec<Datapoint>,
    pub split: SuiteSplit,
}

pub fn gen_suite(cfg: &SuiteConfig) -> Result<Suite, SuiteError> {
    let tasks = task_specs(cfg)?;
    let mut datapoints: Vec<Datapoint> = tasks
        .par_iter()
        .map(|t| predict_app(t, cfg.step_budget, cfg.node_limit))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    datapoints.sort_by(|a, b| (&a.task_id, a.episode, a.decision).cmp(&(&b.task_id, b.episode, b.decision)));
    let ids: Vec<String> = tasks.iter().map(|t| t.task_id.clone()).collect();
    let split = split_tasks(&ids, cfg.seed, cfg.split);
    Ok(Suite {
        config: cfg.clone(),
        tasks,
        datapoints,
        split,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub episodes: usize,
    pub datapoints: usize,
    pub mean_choices: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyFailure {
    pub task_id: String,
    pub episode: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct VerifyReport {
    pub tasks: BTreeMap<String, TaskReport>,
    pub failures: Vec<VerifyFailure>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn verify_task(task: &TaskSpec, points: &[&Datapoint], step_budget: u64, node_limit: usize) -> (TaskReport, Vec<VerifyFailure>) {
    let mut failures = Vec::new();
    let mut fail = |episode: usize, reason: String| {
        failures.push(VerifyFailure {
            task_id: task.task_id.clone(),
            episode,
            reason,
        })
    };
    let mut by_episode: BTreeMap<usize, Vec<&Datapoint>> = BTreeMap::new();
    for p in points {
        by_episode.entry(p.episode).or_default().push(p);
    }
    let report = TaskReport {
        episodes: by_episode.len(),
        datapoints: points.len(),
        mean_choices: if points.is_empty() {
            0.0
        } else {
            points.iter().map(|p| p.num_choices as f64).sum::<f64>() / points.len() as f64
        },
    };
    let setup = load_task(task).and_then(|p| episodes_of(&p, task, step_budget).map(|e| (p, e)));
    let (program, pairs) = match setup {
        Ok(x) => x,
        Err(e) => {
            fail(0, e.to_string());
            return (report, failures);
        }
    };
    for (episode, mut dps) in by_episode {
        dps.sort_by_key(|p| p.decision);
        if dps.iter().enumerate().any(|(i, p)| p.decision != i) {
            fail(episode, "decision indices are not contiguous".into());
            continue;
        }
        let Some(fn_arg) = pairs.get(episode) else {
            fail(episode, "no such episode".into());
            continue;
        };
        let indices: Vec<usize> = dps.iter().map(|p| p.correct).collect();
        let replayed = episode_program(&program, task, fn_arg)
            .and_then(|(expr, env)| drive(&expr, &env, Picks::Indices(&indices), step_budget, node_limit));
        match replayed {
            Err(e) => fail(episode, e),
            Ok(decisions) => {
                let mismatch = decisions.iter().zip(&dps).position(|(d, p)| {
                    d.graph.choices.len() != p.num_choices || d.graph.to_json() != p.graph.get()
                });
                if let Some(i) = mismatch {
                    fail(episode, format!("graph mismatch at decision {i}"));
                }
            }
        }
    }
    (report, failures)
}

/// Replays every episode with its recorded indices and checks that each
/// recomputed graph matches the stored one byte for byte.
pub fn verify_suite(tasks: &[TaskSpec], points: &[Datapoint], step_budget: u64, node_limit: usize) -> VerifyReport {
    let mut by_task: BTreeMap<&str, Vec<&Datapoint>> = BTreeMap::new();
    for p in points {
        by_task.entry(p.task_id.as_str()).or_default().push(p);
    }
    let mut report = VerifyReport::default();
    for id in by_task.keys() {
        if !tasks.iter().any(|t| t.task_id == *id) {
            report.failures.push(VerifyFailure {
                task_id: id.to_string(),
                episode: 0,
                reason: "unknown task".into(),
            });
        }
    }
    let results: Vec<(String, TaskReport, Vec<VerifyFailure>)> = tasks
        .par_iter()
        .filter_map(|t| by_task.get(t.task_id.as_str()).map(|pts| (t, pts)))
        .map(|(t, pts)| {
            let (r, f) = verify_task(t, pts, step_budget, node_limit);
            (t.task_id.clone(), r, f)
        })
        .collect();
    for (id, r, f) in results {
        report.tasks.insert(id, r);
        report.failures.extend(f);
    }
    report
}

#[derive(Serialize, Deserialize)]
pub struct TaskEntry {
    #[serde(flatten)]
    pub spec: TaskSpec,
    pub source_file: String,
    pub episodes: usize,
    pub datapoints: usize,
}

/// The `suite.json` manifest.
#[derive(Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub graph_format_version: u32,
    pub edge_vocab_version: u32,
    pub token_vocab_version: u32,
    pub config: SuiteConfig,
    pub split: SuiteSplit,
    pub tasks: Vec<TaskEntry>,
}

pub fn task_file_name(task_id: &str) -> String {
    format!("{}.dd", task_id.replace('/', "__"))
}

/// Writes the split JSONL files, `suite.json`, vocabulary sidecars and the
/// `tasks/` source corpus under `dir`.
pub fn write_suite(suite: &Suite, dir: &Path) -> Result<(), crate::Error> {
    fs::create_dir_all(dir.join("tasks"))?;
    fs::write(dir.join("tasks").join("stdlib.dd"), STDLIB)?;
    fs::write(dir.join("tasks").join("families.dd"), FAMILY_LIB)?;
    let part = |ids: &[String]| -> BTreeSet<String> { ids.iter().cloned().collect() };
    for (name, ids) in [
        ("train", part(&suite.split.train)),
        ("valid", part(&suite.split.valid)),
        ("test", part(&suite.split.test)),
    ] {
        dataset::write_jsonl(
            &dir.join(format!("{name}.jsonl")),
            suite.datapoints.iter().filter(|d| ids.contains(&d.task_id)),
        )?;
    }
    let mut entries = Vec::new();
    for t in &suite.tasks {
        let file = task_file_name(&t.task_id);
        fs::write(dir.join("tasks").join(&file), &t.source)?;
        let pts: Vec<&Datapoint> = suite.datapoints.iter().filter(|d| d.task_id == t.task_id).collect();
        let episodes: BTreeSet<usize> = pts.iter().map(|d| d.episode).collect();
        entries.push(TaskEntry {
            spec: t.clone(),
            source_file: format!("tasks/{file}"),
            episodes: episodes.len(),
            datapoints: pts.len(),
        });
    }
    let manifest = Manifest {
        format_version: SUITE_FORMAT_VERSION,
        graph_format_version: graph::GRAPH_FORMAT_VERSION,
        edge_vocab_version: graph::EDGE_VOCAB_VERSION,
        token_vocab_version: graph::TOKEN_VOCAB_VERSION,
        config: suite.config.clone(),
        split: suite.split.clone(),
        tasks: entries,
    };
    fs::write(dir.join("suite.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    let mut tokens = BTreeSet::new();
    for d in &suite.datapoints {
        let g: ChoiceGraph = serde_json::from_str(d.graph.get())?;
        tokens.extend(g.nodes);
    }
    fs::write(dir.join("vocab.json"), graph::token_vocab_json(tokens.iter().map(String::as_str)) + "\n")?;
    fs::write(dir.join("edge_types.json"), graph::edge_vocab_json() + "\n")?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, crate::Error> {
    Ok(serde_json::from_str(&fs::read_to_string(dir.join("suite.json"))?)?)
}

/// Every datapoint of the three split files.
pub fn read_datapoints(dir: &Path) -> Result<Vec<Datapoint>, crate::Error> {
    let mut out = Vec::new();
    for name in ["train", "valid", "test"] {
        out.extend(dataset::read_jsonl(&dir.join(format!("{name}.jsonl")))?);
    }
    out.sort_by(|a, b| (&a.task_id, a.episode, a.decision).cmp(&(&b.task_id, b.episode, b.decision)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_of_ten_is_seven_one_two() {
        let ids: Vec<String> = (0..10).map(|i| format!("t{i}")).collect();
        let s = split_tasks(&ids, 0, [70, 10, 20]);
        assert_eq!((s.train.len(), s.valid.len(), s.test.len()), (7, 1, 2));
        let all: BTreeSet<_> = s.train.iter().chain(&s.valid).chain(&s.test).collect();
        assert_eq!(all.len(), 10);
    }

    #[test]
    fn stdlib_choosers_enumerate() {
        let p = stdlib().unwrap();
        let run = |src: &str, n| {
            let e = p.parse_expr(src).unwrap();
            enumerate(&e, p.env(), n, 1_000_000)
                .unwrap()
                .results
                .into_iter()
                .map(|(v, _)| v.to_string())
                .collect::<Vec<_>>()
        };
        assert_eq!(run("(choose-bool)", 10), ["#f", "#t"]);
        assert!(run("(fail)", 10).is_empty());
        assert_eq!(run("(choose-list choose-digit)", 3), ["()", "(0)", "(0 0)"]);
        assert_eq!(run("(choose-tree choose-digit (lambda () '(f 2)))", 1), ["0"]);
    }

    #[test]
    fn identity_bool_task_has_one_binary_decision_per_target() {
        let cfg = SuiteConfig {
            families: vec![Family::Identity],
            ..SuiteConfig::default()
        };
        let tasks = task_specs(&cfg).unwrap();
        let t = tasks.iter().find(|t| t.task_id == "identity/bool").unwrap();
        let pts = predict_app(t, cfg.step_budget, cfg.node_limit).unwrap();
        assert_eq!(pts.len(), 2);
        assert!(pts.iter().all(|p| p.num_choices == 2));
        assert_eq!(pts.iter().map(|p| p.correct).collect::<Vec<_>>(), [0, 1]);
    }
}
