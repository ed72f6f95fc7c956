//! Meta-evaluators: drivers that run a program by resuming its choicepoints.
//!
//! The search space is the tree of choicepoints reachable from a program's
//! entry point. A leaf is either a terminal value (reward 1) or a choicepoint
//! with no choices (failure, reward 0). No transposition detection is done.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::expr::Expr;
use crate::interp::{resume, step, Budget, Choicepoint, Continuation, EvalError, StepResult};
use crate::value::{Env, Value};

/// Probabilities below this are raised to it before taking logs.
pub const MIN_PROBABILITY: f64 = 1e-9;
/// Allowed deviation of a probability vector's sum from 1.
pub const SUM_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug)]
pub enum Outcome {
    Success { value: Value, trace: Vec<usize> },
    Failure { trace: Vec<usize> },
    BudgetExceeded,
}

impl Outcome {
    pub fn is_success(&self) -> bool {
        matches!(self, Outcome::Success { .. })
    }

    pub fn value(&self) -> Option<&Value> {
        match self {
            Outcome::Success { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn trace(&self) -> Option<&[usize]> {
        match self {
            Outcome::Success { trace, .. } | Outcome::Failure { trace } => Some(trace),
            Outcome::BudgetExceeded => None,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SearchStats {
    pub nodes_expanded: usize,
    pub choicepoints_seen: usize,
    pub simulations: usize,
    pub oracle_failures: usize,
    pub wall_time_ms: f64,
}

/// One expansion, as exported to search-trace logs.
#[derive(Clone, Debug, Serialize)]
pub struct SearchEvent {
    pub trace: Vec<usize>,
    pub num_choices: usize,
    pub chosen: usize,
    pub score: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error(transparent)]
    Eval(EvalError),
    #[error("decision index {index} out of range for {len} choices")]
    InvalidDecision { index: usize, len: usize },
    #[error("malformed score vector: {0}")]
    MalformedScore(String),
    #[error("oracle error: {0}")]
    Oracle(String),
}

impl From<EvalError> for SearchError {
    fn from(e: EvalError) -> SearchError {
        SearchError::Eval(e)
    }
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Steps allowed per transition (one step/resume call).
    pub step_budget: u64,
    pub node_budget: usize,
    pub simulations: usize,
    pub c_puct: f64,
    pub record_events: bool,
}

impl Default for SearchConfig {
    fn default() -> SearchConfig {
        SearchConfig {
            step_budget: crate::interp::default_step_budget(),
            node_budget: 10_000,
            simulations: 2_000,
            c_puct: 1.0,
            record_events: false,
        }
    }
}

/// Checks that `scores` is a probability vector over `n` choices.
pub fn validate_scores(scores: &[f64], n: usize) -> Result<(), SearchError> {
    if scores.len() != n {
        return Err(SearchError::MalformedScore(format!(
            "expected {n} entries, got {}",
            scores.len()
        )));
    }
    if let Some(bad) = scores.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(SearchError::MalformedScore(format!("invalid probability {bad}")));
    }
    let sum: f64 = scores.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(SearchError::MalformedScore(format!("entries sum to {sum}")));
    }
    Ok(())
}

pub fn uniform_scores(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in xs.iter().enumerate() {
        if *x > xs[best] {
            best = i;
        }
    }
    best
}

fn start(expr: &Expr, env: &Env, budget: &mut Budget) -> Result<StepResult, EvalError> {
    step(expr.clone(), env.clone(), 0, Continuation::new(), budget)
}

fn extended(trace: &[usize], i: usize) -> Vec<usize> {
    let mut t = Vec::with_capacity(trace.len() + 1);
    t.extend_from_slice(trace);
    t.push(i);
    t
}

/// Runs one path, asking `decide` at every choicepoint. The whole rollout
/// shares one step budget.
pub fn rollout(
    expr: &Expr,
    env: &Env,
    mut decide: impl FnMut(&Choicepoint) -> usize,
    step_budget: u64,
) -> Result<Outcome, SearchError> {
    let mut budget = Budget::new(step_budget);
    let mut trace = Vec::new();
    let mut state = match start(expr, env, &mut budget) {
        Err(EvalError::BudgetExceeded(_)) => return Ok(Outcome::BudgetExceeded),
        other => other?,
    };
    loop {
        let cp = match state {
            StepResult::Terminal(value) => return Ok(Outcome::Success { value, trace }),
            StepResult::Suspended(cp) => cp,
        };
        if cp.is_failure() {
            return Ok(Outcome::Failure { trace });
        }
        let index = decide(&cp);
        if index >= cp.choices.len() {
            return Err(SearchError::InvalidDecision {
                index,
                len: cp.choices.len(),
            });
        }
        trace.push(index);
        state = match resume(&cp, index, &mut budget) {
            Err(EvalError::BudgetExceeded(_)) => return Ok(Outcome::BudgetExceeded),
            other => other?,
        };
    }
}

/// Rolls out following a fixed list of choice indices. Running out of
/// indices at a live choicepoint is an invalid decision.
pub fn replay(expr: &Expr, env: &Env, trace: &[usize], step_budget: u64) -> Result<Outcome, SearchError> {
    let mut it = trace.iter().copied();
    rollout(expr, env, |_| it.next().unwrap_or(usize::MAX), step_budget)
}

#[derive(Clone, Debug, Default)]
pub struct Enumeration {
    /// Successful leaves as (value, trace), in depth-first left-to-right order.
    pub results: Vec<(Value, Vec<usize>)>,
    /// Set when the step budget ran out before the search finished.
    pub truncated: bool,
}

/// Depth-first, left-to-right enumeration of up to `max_results` successful
/// leaves, sharing one step budget across the whole walk.
pub fn enumerate(
    expr: &Expr,
    env: &Env,
    max_results: usize,
    step_budget: u64,
) -> Result<Enumeration, SearchError> {
    struct Frame {
        cp: Choicepoint,
        next: usize,
        trace: Vec<usize>,
    }
    let mut out = Enumeration::default();
    if max_results == 0 {
        return Ok(out);
    }
    let mut budget = Budget::new(step_budget);
    let mut stack = Vec::new();
    match start(expr, env, &mut budget) {
        Err(EvalError::BudgetExceeded(_)) => {
            out.truncated = true;
            return Ok(out);
        }
        Err(e) => return Err(e.into()),
        Ok(StepResult::Terminal(v)) => {
            out.results.push((v, Vec::new()));
            return Ok(out);
        }
        Ok(StepResult::Suspended(cp)) => stack.push(Frame {
            cp,
            next: 0,
            trace: Vec::new(),
        }),
    }
    while let Some(frame) = stack.last_mut() {
        if frame.next >= frame.cp.choices.len() {
            stack.pop();
            continue;
        }
        let index = frame.next;
        frame.next += 1;
        let trace = extended(&frame.trace, index);
        match resume(&frame.cp, index, &mut budget) {
            Err(EvalError::BudgetExceeded(_)) => {
                out.truncated = true;
                break;
            }
            Err(e) => return Err(e.into()),
            Ok(StepResult::Terminal(v)) => {
                out.results.push((v, trace));
                if out.results.len() >= max_results {
                    break;
                }
            }
            Ok(StepResult::Suspended(cp)) => {
                if !cp.is_failure() {
                    stack.push(Frame { cp, next: 0, trace });
                }
            }
        }
    }
    Ok(out)
}

struct Frontier {
    log_prob: f64,
    seq: u64,
    cp: Choicepoint,
    trace: Vec<usize>,
}

impl PartialEq for Frontier {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Frontier {}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Max-heap on path log-probability; ties go to the earlier insertion.
impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        self.log_prob
            .total_cmp(&other.log_prob)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

pub struct SearchResult {
    pub outcome: Outcome,
    pub stats: SearchStats,
    pub events: Vec<SearchEvent>,
}

/// Best-first search keyed by path log-probability under `score`.
/// Returns the first successful leaf generated.
pub fn best_first(
    expr: &Expr,
    env: &Env,
    mut score: impl FnMut(&Choicepoint) -> Result<Vec<f64>, SearchError>,
    config: &SearchConfig,
) -> Result<SearchResult, SearchError> {
    let clock = Instant::now();
    let mut stats = SearchStats::default();
    let mut events = Vec::new();
    let finish = |outcome, mut stats: SearchStats, events| {
        stats.wall_time_ms = clock.elapsed().as_secs_f64() * 1e3;
        Ok(SearchResult {
            outcome,
            stats,
            events,
        })
    };
    let root = match start(expr, env, &mut Budget::new(config.step_budget)) {
        Err(EvalError::BudgetExceeded(_)) => return finish(Outcome::BudgetExceeded, stats, events),
        other => other?,
    };
    let root = match root {
        StepResult::Terminal(value) => {
            return finish(Outcome::Success { value, trace: vec![] }, stats, events)
        }
        StepResult::Suspended(cp) if cp.is_failure() => {
            return finish(Outcome::Failure { trace: vec![] }, stats, events)
        }
        StepResult::Suspended(cp) => cp,
    };
    stats.choicepoints_seen = 1;
    let mut seq = 0;
    let mut heap = BinaryHeap::new();
    heap.push(Frontier {
        log_prob: 0.0,
        seq,
        cp: root,
        trace: vec![],
    });
    while let Some(node) = heap.pop() {
        if stats.nodes_expanded >= config.node_budget {
            return finish(Outcome::BudgetExceeded, stats, events);
        }
        stats.nodes_expanded += 1;
        let n = node.cp.choices.len();
        let scores = score(&node.cp)?;
        validate_scores(&scores, n)?;
        if config.record_events {
            events.push(SearchEvent {
                trace: node.trace.clone(),
                num_choices: n,
                chosen: argmax(&scores),
                score: scores.clone(),
            });
        }
        for (i, p) in scores.iter().enumerate() {
            let trace = extended(&node.trace, i);
            match resume(&node.cp, i, &mut Budget::new(config.step_budget)) {
                Err(EvalError::BudgetExceeded(_)) => {
                    return finish(Outcome::BudgetExceeded, stats, events)
                }
                Err(e) => return Err(e.into()),
                Ok(StepResult::Terminal(value)) => {
                    return finish(Outcome::Success { value, trace }, stats, events)
                }
                Ok(StepResult::Suspended(cp)) if cp.is_failure() => {}
                Ok(StepResult::Suspended(cp)) => {
                    stats.choicepoints_seen += 1;
                    seq += 1;
                    heap.push(Frontier {
                        log_prob: node.log_prob + p.max(MIN_PROBABILITY).ln(),
                        seq,
                        cp,
                        trace,
                    });
                }
            }
        }
    }
    finish(Outcome::Failure { trace: vec![] }, stats, events)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum NodeState {
    Unexpanded,
    Expanded,
    /// Every leaf below fails; never selected again.
    Failed,
}

struct Node {
    cp: Option<Choicepoint>,
    trace: Vec<usize>,
    prior: f64,
    visits: u32,
    total: f64,
    value_estimate: f64,
    children: Vec<usize>,
    state: NodeState,
}

impl Node {
    fn new(cp: Option<Choicepoint>, trace: Vec<usize>, prior: f64, state: NodeState) -> Node {
        Node {
            cp,
            trace,
            prior,
            visits: 0,
            total: 0.0,
            value_estimate: 0.0,
            children: Vec::new(),
            state,
        }
    }
}

/// Value/policy oracle signature used by [`mcts`]: a probability vector over
/// the choices and a value estimate in `[0, 1]`.
pub type PolicyValue = (Vec<f64>, f64);

struct MctsTree {
    nodes: Vec<Node>,
    c_puct: f64,
    step_budget: u64,
}

enum SimResult {
    Continue,
    Found(Value, Vec<usize>),
    RootFailed,
    BudgetExceeded,
}

impl MctsTree {
    fn new(root: Choicepoint, c_puct: f64, step_budget: u64) -> MctsTree {
        MctsTree {
            nodes: vec![Node::new(Some(root), vec![], 1.0, NodeState::Unexpanded)],
            c_puct,
            step_budget,
        }
    }

    fn select(&self, parent: usize) -> Option<usize> {
        let p = &self.nodes[parent];
        let sqrt_n = f64::from(p.visits).sqrt();
        let mut best: Option<(usize, f64)> = None;
        for &c in &p.children {
            let child = &self.nodes[c];
            if child.state == NodeState::Failed {
                continue;
            }
            let q = if child.visits > 0 {
                child.total / f64::from(child.visits)
            } else {
                p.value_estimate
            };
            let u = self.c_puct * child.prior * sqrt_n / (1.0 + f64::from(child.visits));
            let score = q + u;
            if best.map_or(true, |(_, b)| score > b) {
                best = Some((c, score));
            }
        }
        best.map(|(c, _)| c)
    }

    fn simulate(
        &mut self,
        oracle: &mut impl FnMut(&Choicepoint) -> Result<PolicyValue, SearchError>,
        stats: &mut SearchStats,
        events: Option<&mut Vec<SearchEvent>>,
    ) -> Result<SimResult, SearchError> {
        let mut path = vec![0];
        let mut id = 0;
        while self.nodes[id].state == NodeState::Expanded {
            match self.select(id) {
                Some(c) => {
                    id = c;
                    path.push(c);
                }
                None => {
                    // All children failed; should already be marked.
                    self.nodes[id].state = NodeState::Failed;
                    return Ok(self.propagate_failure(&path));
                }
            }
        }
        if self.nodes[id].state == NodeState::Failed {
            return Ok(self.propagate_failure(&path));
        }
        let cp = self.nodes[id].cp.take().expect("unexpanded node keeps its choicepoint");
        let n = cp.choices.len();
        let (policy, value) = oracle(&cp)?;
        validate_scores(&policy, n)?;
        if !(0.0..=1.0).contains(&value) {
            return Err(SearchError::MalformedScore(format!("value estimate {value} outside [0, 1]")));
        }
        stats.nodes_expanded += 1;
        if let Some(events) = events {
            events.push(SearchEvent {
                trace: self.nodes[id].trace.clone(),
                num_choices: n,
                chosen: argmax(&policy),
                score: policy.clone(),
            });
        }
        self.nodes[id].value_estimate = value;
        self.nodes[id].state = NodeState::Expanded;
        let parent_trace = self.nodes[id].trace.clone();
        let mut found = None;
        for (i, prior) in policy.iter().enumerate() {
            let trace = extended(&parent_trace, i);
            let (cp, state) = match resume(&cp, i, &mut Budget::new(self.step_budget)) {
                Err(EvalError::BudgetExceeded(_)) => return Ok(SimResult::BudgetExceeded),
                Err(e) => return Err(e.into()),
                Ok(StepResult::Terminal(v)) => {
                    found = Some((v, trace.clone()));
                    (None, NodeState::Failed)
                }
                Ok(StepResult::Suspended(cp)) if cp.is_failure() => (None, NodeState::Failed),
                Ok(StepResult::Suspended(cp)) => {
                    stats.choicepoints_seen += 1;
                    (Some(cp), NodeState::Unexpanded)
                }
            };
            let child = self.nodes.len();
            self.nodes.push(Node::new(cp, trace, *prior, state));
            self.nodes[id].children.push(child);
            if found.is_some() {
                break;
            }
        }
        let reward = if found.is_some() { 1.0 } else { value };
        for &p in &path {
            self.nodes[p].visits += 1;
            self.nodes[p].total += reward;
        }
        if let Some((v, trace)) = found {
            return Ok(SimResult::Found(v, trace));
        }
        Ok(self.propagate_failure(&path))
    }

    /// Marks nodes on `path` whose children have all failed, bottom-up.
    fn propagate_failure(&mut self, path: &[usize]) -> SimResult {
        for &p in path.iter().rev() {
            let node = &self.nodes[p];
            let dead = node.state == NodeState::Failed
                || (node.state == NodeState::Expanded
                    && node
                        .children
                        .iter()
                        .all(|&c| self.nodes[c].state == NodeState::Failed));
            if !dead {
                break;
            }
            self.nodes[p].state = NodeState::Failed;
        }
        if self.nodes[0].state == NodeState::Failed {
            SimResult::RootFailed
        } else {
            SimResult::Continue
        }
    }

    #[cfg(test)]
    fn visit_invariant_holds(&self) -> bool {
        self.nodes.iter().all(|n| {
            n.state == NodeState::Unexpanded
                || n.children.is_empty()
                || n.visits == n.children.iter().map(|&c| self.nodes[c].visits).sum::<u32>() + 1
        })
    }
}

/// Monte Carlo tree search with PUCT selection. Expanding a node queries the
/// oracle once and resumes every child, so terminal children are seen as
/// soon as their parent is expanded. Rewards are binary, so the search
/// stops at the first success.
pub fn mcts(
    expr: &Expr,
    env: &Env,
    mut oracle: impl FnMut(&Choicepoint) -> Result<PolicyValue, SearchError>,
    config: &SearchConfig,
) -> Result<SearchResult, SearchError> {
    let clock = Instant::now();
    let mut stats = SearchStats::default();
    let mut events = Vec::new();
    let finish = |outcome, mut stats: SearchStats, events| {
        stats.wall_time_ms = clock.elapsed().as_secs_f64() * 1e3;
        Ok(SearchResult {
            outcome,
            stats,
            events,
        })
    };
    let root = match start(expr, env, &mut Budget::new(config.step_budget)) {
        Err(EvalError::BudgetExceeded(_)) => return finish(Outcome::BudgetExceeded, stats, events),
        other => other?,
    };
    let root = match root {
        StepResult::Terminal(value) => {
            return finish(Outcome::Success { value, trace: vec![] }, stats, events)
        }
        StepResult::Suspended(cp) if cp.is_failure() => {
            return finish(Outcome::Failure { trace: vec![] }, stats, events)
        }
        StepResult::Suspended(cp) => cp,
    };
    stats.choicepoints_seen = 1;
    let mut tree = MctsTree::new(root, config.c_puct, config.step_budget);
    while stats.simulations < config.simulations {
        stats.simulations += 1;
        let sink = config.record_events.then_some(&mut events);
        match tree.simulate(&mut oracle, &mut stats, sink)? {
            SimResult::Continue => {}
            SimResult::Found(value, trace) => {
                return finish(Outcome::Success { value, trace }, stats, events)
            }
            SimResult::RootFailed => return finish(Outcome::Failure { trace: vec![] }, stats, events),
            SimResult::BudgetExceeded => return finish(Outcome::BudgetExceeded, stats, events),
        }
    }
    finish(Outcome::BudgetExceeded, stats, events)
}
