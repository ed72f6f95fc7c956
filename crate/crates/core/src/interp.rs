//! The step evaluator.
//!
//! Evaluation runs in applicative order, strictly left to right (operator
//! first), on an explicit continuation: a stack of [`Segment`]s, each a
//! template expression with one [`Expr::Hole`] awaiting a value. Reaching a
//! `choose` suspends evaluation and hands back a [`Choicepoint`] that owns
//! the whole pending stack, so it can be resumed with any of its choices
//! (possibly several times) or embedded for an oracle.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::expr::{analyze, Expr};
use crate::primitives::{self, PrimKind};
use crate::reader::{self, expand_sugar};
use crate::value::{Env, Symbol, Value};

pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;

/// The default per-rollout step budget, overridable with `DODONA_STEP_BUDGET`.
pub fn default_step_budget() -> u64 {
    std::env::var("DODONA_STEP_BUDGET")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_STEP_BUDGET)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    Unbound(Symbol),
    #[error("{name}: expected {expected} arguments, got {got}")]
    Arity {
        name: String,
        expected: String,
        got: usize,
    },
    #[error("cannot apply non-function {0}")]
    NotAFunction(String),
    #[error("{prim}: expected {expected}, got {got}")]
    Type {
        prim: &'static str,
        expected: &'static str,
        got: String,
    },
    #[error("{0}: division by zero")]
    DivideByZero(&'static str),
    #[error("{0}: integer overflow")]
    Overflow(&'static str),
    #[error("nth: index {index} out of range for list of length {len}")]
    IndexOutOfRange { index: i64, len: usize },
    #[error("choose: expected a proper list of choices, got {0}")]
    BadChoices(String),
    #[error("choice index {index} out of range for {len} choices")]
    ChoiceIndex { index: usize, len: usize },
    #[error("define is only allowed at top level")]
    DefineNotTopLevel,
    #[error("step budget of {0} exceeded")]
    BudgetExceeded(u64),
    #[error("encountered a choicepoint in a deterministic evaluation")]
    UnexpectedChoice,
    #[error("internal interpreter error: {0}")]
    Internal(String),
}

impl EvalError {
    pub fn type_error(prim: &'static str, expected: &'static str, got: &Value) -> EvalError {
        EvalError::Type {
            prim,
            expected,
            got: format!("{} {}", got.type_name(), got),
        }
    }
}

/// Counts interpreter steps against a fixed limit.
#[derive(Clone, Debug)]
pub struct Budget {
    limit: u64,
    used: u64,
}

impl Budget {
    pub fn new(limit: u64) -> Budget {
        Budget { limit, used: 0 }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    fn tick(&mut self) -> Result<(), EvalError> {
        self.used += 1;
        if self.used > self.limit {
            Err(EvalError::BudgetExceeded(self.limit))
        } else {
            Ok(())
        }
    }
}

impl Default for Budget {
    fn default() -> Budget {
        Budget::new(default_step_budget())
    }
}

/// One suspended frame: the template to resume once its hole is filled,
/// the environment to resume in, and how many leading sub-forms of the
/// template are already evaluated.
#[derive(Clone, Debug)]
pub struct Segment {
    pub template: Expr,
    pub env: Env,
    pub evaluated: usize,
}

struct ContNode {
    segment: Segment,
    next: Continuation,
    len: usize,
}

/// A persistent stack of segments; pushing and popping share tails, so a
/// choicepoint can be resumed many times without copying its stack.
#[derive(Clone, Default)]
pub struct Continuation(Option<Arc<ContNode>>);

impl Continuation {
    pub fn new() -> Continuation {
        Continuation(None)
    }

    pub fn push(&self, segment: Segment) -> Continuation {
        Continuation(Some(Arc::new(ContNode {
            segment,
            next: self.clone(),
            len: self.len() + 1,
        })))
    }

    pub fn pop(&self) -> Option<(&Segment, &Continuation)> {
        self.0.as_ref().map(|n| (&n.segment, &n.next))
    }

    pub fn len(&self) -> usize {
        self.0.as_ref().map_or(0, |n| n.len)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_none()
    }

    /// Segments from the innermost (top) outwards.
    pub fn iter(&self) -> impl Iterator<Item = &Segment> {
        let mut cur = self;
        std::iter::from_fn(move || {
            let (seg, next) = cur.pop()?;
            cur = next;
            Some(seg)
        })
    }
}

impl std::fmt::Debug for Continuation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

/// A suspended decision: the candidate values and the continuation that
/// consumes whichever one is picked. No choices means a dead branch.
#[derive(Clone, Debug)]
pub struct Choicepoint {
    pub choices: Vec<Value>,
    pub cstack: Continuation,
}

#[derive(Clone, Debug)]
pub enum StepResult {
    Terminal(Value),
    Suspended(Choicepoint),
}

impl StepResult {
    pub fn is_failure(&self) -> bool {
        matches!(self, StepResult::Suspended(cp) if cp.choices.is_empty())
    }
}

#[derive(Serialize)]
struct SegmentJson {
    template: String,
    env: BTreeMap<String, String>,
    evaluated: usize,
}

#[derive(Serialize)]
struct ChoicepointJson {
    choices: Vec<String>,
    segments: Vec<SegmentJson>,
}

impl Choicepoint {
    pub fn is_failure(&self) -> bool {
        self.choices.is_empty()
    }

    /// Logging form; environments list only bindings free in each template.
    pub fn to_json(&self) -> String {
        let json = ChoicepointJson {
            choices: self.choices.iter().map(Value::to_string).collect(),
            segments: self
                .cstack
                .iter()
                .map(|seg| SegmentJson {
                    template: seg.template.to_string(),
                    env: seg
                        .template
                        .free_vars()
                        .into_iter()
                        .filter_map(|s| {
                            seg.env
                                .try_lookup(s)
                                .map(|v| (s.as_str().to_owned(), v.to_string()))
                        })
                        .collect(),
                    evaluated: seg.evaluated,
                })
                .collect(),
        };
        serde_json::to_string(&json).expect("choicepoint serializes")
    }
}

fn with_hole_at(items: &[Expr], index: usize) -> Expr {
    let mut template = items.to_vec();
    template[index] = Expr::Hole;
    Expr::App(template.into())
}

/// Evaluates `expr` in `env`, with its first `evaluated` sub-forms already
/// values, on top of `cstack`.
pub fn step(
    expr: Expr,
    env: Env,
    evaluated: usize,
    cstack: Continuation,
    budget: &mut Budget,
) -> Result<StepResult, EvalError> {
    let (mut expr, mut env, mut i, mut cstack) = (expr, env, evaluated, cstack);
    loop {
        budget.tick()?;
        let value = match &expr {
            Expr::Const(v) | Expr::Quote(v) => v.clone(),
            Expr::Var(s) => env.lookup(*s)?,
            Expr::Lambda(l) => Value::Closure(Arc::new(crate::value::Closure {
                lambda: l.clone(),
                env: env.clone(),
            })),
            Expr::Hole => return Err(EvalError::Internal("evaluated a hole".into())),
            Expr::If(parts) => {
                if i == 0 && !parts[0].is_value() {
                    let template = Expr::If(Arc::new([Expr::Hole, parts[1].clone(), parts[2].clone()]));
                    cstack = cstack.push(Segment {
                        template,
                        env: env.clone(),
                        evaluated: 1,
                    });
                    expr = parts[0].clone();
                } else {
                    let Expr::Const(cond) = &parts[0] else {
                        return Err(EvalError::Internal("if resumed without a condition value".into()));
                    };
                    expr = if cond.is_truthy() { parts[1].clone() } else { parts[2].clone() };
                }
                i = 0;
                continue;
            }
            Expr::Choose(arg) => {
                if i == 0 && !arg.is_value() {
                    cstack = cstack.push(Segment {
                        template: Expr::Choose(Arc::new(Expr::Hole)),
                        env: env.clone(),
                        evaluated: 1,
                    });
                    expr = (**arg).clone();
                    i = 0;
                    continue;
                }
                let Expr::Const(list) = &**arg else {
                    return Err(EvalError::Internal("choose resumed without a value".into()));
                };
                let choices = list
                    .list_to_vec()
                    .ok_or_else(|| EvalError::BadChoices(list.to_string()))?;
                return Ok(StepResult::Suspended(Choicepoint { choices, cstack }));
            }
            Expr::Define(name, body) => {
                if !env.is_global() {
                    return Err(EvalError::DefineNotTopLevel);
                }
                if i == 0 && !body.is_value() {
                    cstack = cstack.push(Segment {
                        template: Expr::Define(*name, Arc::new(Expr::Hole)),
                        env: env.clone(),
                        evaluated: 1,
                    });
                    expr = (**body).clone();
                    i = 0;
                    continue;
                }
                let Expr::Const(v) = &**body else {
                    return Err(EvalError::Internal("define resumed without a value".into()));
                };
                env.define(*name, v.clone());
                Value::Symbol(*name)
            }
            Expr::App(items) => {
                while i < items.len() && items[i].is_value() {
                    i += 1;
                }
                if i < items.len() {
                    cstack = cstack.push(Segment {
                        template: with_hole_at(items, i),
                        env: env.clone(),
                        evaluated: i + 1,
                    });
                    expr = items[i].clone();
                    i = 0;
                    continue;
                }
                let values: Vec<Value> = items
                    .iter()
                    .map(|e| match e {
                        Expr::Const(v) => v.clone(),
                        _ => unreachable!("all application items are values"),
                    })
                    .collect();
                let (f, args) = values.split_first().ok_or_else(|| {
                    EvalError::Internal("empty application".into())
                })?;
                match f {
                    Value::Primitive(p) => {
                        p.check_arity(args.len())?;
                        match p.kind {
                            PrimKind::Pure(func) => func(args)?,
                            PrimKind::Expand(func) => {
                                expr = func(args)?;
                                i = 0;
                                continue;
                            }
                        }
                    }
                    Value::Closure(c) => {
                        if c.lambda.params.len() != args.len() {
                            return Err(EvalError::Arity {
                                name: f.to_string(),
                                expected: c.lambda.params.len().to_string(),
                                got: args.len(),
                            });
                        }
                        env = c.env.extend(c.lambda.params.clone(), args.to_vec())?;
                        expr = c.lambda.body.clone();
                        i = 0;
                        continue;
                    }
                    other => return Err(EvalError::NotAFunction(other.to_string())),
                }
            }
        };
        match cstack.pop() {
            None => return Ok(StepResult::Terminal(value)),
            Some((seg, rest)) => {
                expr = seg
                    .template
                    .fill_hole(value)
                    .ok_or_else(|| EvalError::Internal("segment template has no hole".into()))?;
                env = seg.env.clone();
                i = seg.evaluated;
                let rest = rest.clone();
                cstack = rest;
            }
        }
    }
}

/// Continues a choicepoint with the choice at `index`.
pub fn resume(cp: &Choicepoint, index: usize, budget: &mut Budget) -> Result<StepResult, EvalError> {
    let choice = cp.choices.get(index).ok_or(EvalError::ChoiceIndex {
        index,
        len: cp.choices.len(),
    })?;
    match cp.cstack.pop() {
        None => Ok(StepResult::Terminal(choice.clone())),
        Some((seg, rest)) => {
            let expr = seg
                .template
                .fill_hole(choice.clone())
                .ok_or_else(|| EvalError::Internal("segment template has no hole".into()))?;
            step(expr, seg.env.clone(), seg.evaluated, rest.clone(), budget)
        }
    }
}

/// Evaluates a choose-free expression to its value.
pub fn run_deterministic(expr: &Expr, env: &Env, budget: &mut Budget) -> Result<Value, EvalError> {
    match step(expr.clone(), env.clone(), 0, Continuation::new(), budget)? {
        StepResult::Terminal(v) => Ok(v),
        StepResult::Suspended(_) => Err(EvalError::UnexpectedChoice),
    }
}

/// A loaded program: a global environment with its top-level definitions,
/// plus the last top-level expression as the entry point.
pub struct Program {
    env: Env,
    main: Option<Expr>,
}

impl Program {
    /// An empty program with only the primitives bound.
    pub fn new() -> Program {
        let env = Env::new_global();
        primitives::install(&env);
        Program { env, main: None }
    }

    pub fn from_source(src: &str) -> Result<Program, crate::Error> {
        let mut program = Program::new();
        program.load(src)?;
        Ok(program)
    }

    /// Loads top-level forms. Definitions and all but the last expression
    /// are evaluated now; the last expression becomes the entry point.
    pub fn load(&mut self, src: &str) -> Result<(), crate::Error> {
        let forms = reader::read(src)?;
        let mut pending: Option<Expr> = None;
        for form in &forms {
            let core = analyze(&expand_sugar(form)?, true)?;
            if let Some(prev) = pending.take() {
                run_deterministic(&prev, &self.env, &mut Budget::default())?;
            }
            if matches!(core, Expr::Define(..)) {
                run_deterministic(&core, &self.env, &mut Budget::default())?;
            } else {
                pending = Some(core);
            }
        }
        if pending.is_some() {
            self.main = pending;
        }
        Ok(())
    }

    /// Parses a single non-definition expression against this program.
    pub fn parse_expr(&self, src: &str) -> Result<Expr, crate::Error> {
        let forms = reader::read(src)?;
        match forms.as_slice() {
            [one] => Ok(analyze(&expand_sugar(one)?, false)?),
            _ => Err(crate::Error::Usage(format!(
                "expected exactly one expression, found {}",
                forms.len()
            ))),
        }
    }

    pub fn env(&self) -> &Env {
        &self.env
    }

    pub fn main(&self) -> Option<&Expr> {
        self.main.as_ref()
    }

    pub fn set_main(&mut self, expr: Expr) {
        self.main = Some(expr);
    }

    pub fn lookup(&self, name: &str) -> Option<Value> {
        self.env.try_lookup(Symbol::new(name))
    }

    /// Steps the entry point from scratch.
    pub fn start(&self, budget: &mut Budget) -> Result<StepResult, EvalError> {
        let main = self
            .main
            .clone()
            .ok_or_else(|| EvalError::Internal("program has no entry expression".into()))?;
        step(main, self.env.clone(), 0, Continuation::new(), budget)
    }

    pub fn eval(&self, src: &str) -> Result<Value, crate::Error> {
        let expr = self.parse_expr(src)?;
        Ok(run_deterministic(&expr, &self.env, &mut Budget::default())?)
    }
}

impl Default for Program {
    fn default() -> Program {
        Program::new()
    }
}

impl Drop for Program {
    fn drop(&mut self) {
        self.env.clear_globals();
    }
}
