//! Random argument generators for the task families.

use crate::rng::SplitMix64;
use crate::value::Value;

pub fn digit(r: &mut SplitMix64) -> Value {
    Value::Int(r.below(10) as i64)
}

pub fn boolean(r: &mut SplitMix64) -> Value {
    Value::Bool(r.chance(1, 2))
}

pub fn list_of(r: &mut SplitMix64, max_len: u64, elem: fn(&mut SplitMix64) -> Value) -> Value {
    let n = r.below(max_len + 1);
    Value::list((0..n).map(|_| elem(r)).collect::<Vec<_>>())
}

/// A tree whose nodes are `(a child)` or `(b left right)`.
pub fn tree(r: &mut SplitMix64, max_depth: u32, leaf: fn(&mut SplitMix64) -> Value) -> Value {
    if max_depth == 0 || r.chance(2, 5) {
        return leaf(r);
    }
    if r.chance(1, 3) {
        Value::list(vec![Value::sym("a"), tree(r, max_depth - 1, leaf)])
    } else {
        Value::list(vec![
            Value::sym("b"),
            tree(r, max_depth - 1, leaf),
            tree(r, max_depth - 1, leaf),
        ])
    }
}

/// A valid child-index path into `t`.
pub fn path_into(r: &mut SplitMix64, t: &Value) -> Value {
    let mut path = Vec::new();
    let mut cur = t.clone();
    while let Some(items) = cur.list_to_vec().filter(|v| v.len() > 1) {
        if r.chance(1, 3) {
            break;
        }
        let i = r.below(items.len() as u64 - 1) as usize;
        path.push(Value::Int(i as i64));
        cur = items[i + 1].clone();
    }
    Value::list(path)
}

/// A dense polynomial over `nvars` variables, degree at most 3 in the
/// innermost variable and at most 1 in the others.
pub fn dense_poly(r: &mut SplitMix64, nvars: usize) -> Value {
    if nvars == 0 {
        return Value::Int(r.below(4) as i64);
    }
    let len = r.below(if nvars > 1 { 2 } else { 4 }) + 1;
    Value::list((0..len).map(|_| dense_poly(r, nvars - 1)).collect::<Vec<_>>())
}

/// First-order terms over unary f, g, h, binary k, constants a, b and
/// pattern variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Var(&'static str),
    App(&'static str, Vec<Term>),
}

const UNARY: &[&str] = &["f", "g", "h"];
const CONSTANTS: &[&str] = &["a", "b"];
const PATTERN_VARS: &[&str] = &["x", "y"];

/// Symbol precedence for the ordering: k > f > g > h > a > b.
fn precedence(head: &str) -> usize {
    ["b", "a", "h", "g", "f", "k"].iter().position(|h| *h == head).expect("known symbol")
}

impl Term {
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    fn var_count(&self, v: &str) -> usize {
        match self {
            Term::Var(x) => usize::from(*x == v),
            Term::App(_, args) => args.iter().map(|a| a.var_count(v)).sum(),
        }
    }

    pub fn to_value(&self) -> Value {
        match self {
            Term::Var(x) => Value::list(vec![Value::sym("?"), Value::sym(x)]),
            Term::App(h, args) if args.is_empty() => Value::sym(h),
            Term::App(h, args) => {
                let mut items = vec![Value::sym(h)];
                items.extend(args.iter().map(Term::to_value));
                Value::list(items)
            }
        }
    }
}

/// Knuth-Bendix order with unit weights and the fixed precedence.
pub fn kbo_greater(s: &Term, t: &Term) -> bool {
    if PATTERN_VARS.iter().any(|v| t.var_count(v) > s.var_count(v)) {
        return false;
    }
    let (ws, wt) = (s.size(), t.size());
    if ws != wt {
        return ws > wt;
    }
    match (s, t) {
        (Term::App(f, ss), Term::App(g, ts)) => {
            if f != g {
                return precedence(f) > precedence(g);
            }
            for (a, b) in ss.iter().zip(ts) {
                if a != b {
                    return kbo_greater(a, b);
                }
            }
            false
        }
        _ => false,
    }
}

/// Accepts a rule when its left side is not a variable, every variable of
/// the right side occurs on the left, and it strictly decreases under
/// [`kbo_greater`], which guarantees rewriting terminates.
pub fn rule_terminates(lhs: &Term, rhs: &Term) -> bool {
    !matches!(lhs, Term::Var(_)) && kbo_greater(lhs, rhs)
}

fn term(r: &mut SplitMix64, depth: u32, vars: bool) -> Term {
    if depth == 0 || r.chance(1, 3) {
        if vars && r.chance(1, 2) {
            return Term::Var(*r.pick(PATTERN_VARS));
        }
        return Term::App(*r.pick(CONSTANTS), vec![]);
    }
    if r.chance(1, 4) {
        Term::App("k", vec![term(r, depth - 1, vars), term(r, depth - 1, vars)])
    } else {
        Term::App(*r.pick(UNARY), vec![term(r, depth - 1, vars)])
    }
}

pub fn ground_term(r: &mut SplitMix64) -> Term {
    loop {
        let t = term(r, 4, false);
        if (2..=8).contains(&t.size()) {
            return t;
        }
    }
}

/// Between two and three terminating rules.
pub fn rule_set(r: &mut SplitMix64) -> Vec<(Term, Term)> {
    let want = 2 + r.below(2) as usize;
    let mut rules: Vec<(Term, Term)> = Vec::new();
    while rules.len() < want {
        let a = term(r, 2, true);
        let b = term(r, 2, true);
        let (lhs, rhs) = if kbo_greater(&a, &b) { (a, b) } else { (b, a) };
        if rule_terminates(&lhs, &rhs) && lhs.size() <= 4 && !rules.iter().any(|(l, _)| *l == lhs) {
            rules.push((lhs, rhs));
        }
    }
    rules
}

pub fn rules_value(rules: &[(Term, Term)]) -> Value {
    Value::list(
        rules
            .iter()
            .map(|(l, r)| Value::list(vec![l.to_value(), r.to_value()]))
            .collect::<Vec<_>>(),
    )
}

/// Simple types: the base type or an arrow.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ty {
    Base,
    Arrow(Box<Ty>, Box<Ty>),
}

impl Ty {
    pub fn arrow(a: Ty, b: Ty) -> Ty {
        Ty::Arrow(Box::new(a), Box::new(b))
    }

    pub fn to_value(&self) -> Value {
        match self {
            Ty::Base => Value::sym("i"),
            Ty::Arrow(a, b) => Value::list(vec![Value::sym("->"), a.to_value(), b.to_value()]),
        }
    }
}

/// Typed lambda terms with de Bruijn indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lam {
    Var(usize),
    Abs(Ty, Box<Lam>),
    App(Box<Lam>, Box<Lam>),
    Meta(usize),
}

impl Lam {
    pub fn size(&self) -> usize {
        match self {
            Lam::Var(_) | Lam::Meta(_) => 1,
            Lam::Abs(_, b) => 1 + b.size(),
            Lam::App(f, x) => 1 + f.size() + x.size(),
        }
    }

    pub fn has_redex(&self) -> bool {
        match self {
            Lam::Var(_) | Lam::Meta(_) => false,
            Lam::Abs(_, b) => b.has_redex(),
            Lam::App(f, x) => matches!(**f, Lam::Abs(..)) || f.has_redex() || x.has_redex(),
        }
    }

    pub fn to_value(&self) -> Value {
        match self {
            Lam::Var(i) => Value::list(vec![Value::sym("var"), Value::Int(*i as i64)]),
            Lam::Meta(i) => Value::list(vec![Value::sym("mv"), Value::Int(*i as i64)]),
            Lam::Abs(t, b) => Value::list(vec![Value::sym("lam"), t.to_value(), b.to_value()]),
            Lam::App(f, x) => Value::list(vec![Value::sym("app"), f.to_value(), x.to_value()]),
        }
    }
}

pub const MAX_LAMBDA_SIZE: usize = 12;

/// Metavariable signatures.
pub fn signature(which: usize) -> Vec<Ty> {
    let ii = || Ty::arrow(Ty::Base, Ty::Base);
    match which {
        0 => vec![Ty::Base, ii()],
        _ => vec![ii(), Ty::arrow(Ty::Base, ii()), Ty::Base],
    }
}

pub fn signature_value(sig: &[Ty]) -> Value {
    Value::list(sig.iter().map(Ty::to_value).collect::<Vec<_>>())
}

fn small_type(r: &mut SplitMix64) -> Ty {
    match r.below(4) {
        0 | 1 => Ty::Base,
        2 => Ty::arrow(Ty::Base, Ty::Base),
        _ => Ty::arrow(Ty::arrow(Ty::Base, Ty::Base), Ty::Base),
    }
}

/// A term of type `ty` in context `ctx` (innermost binder first), or None
/// when the fuel runs out.
fn lam_term(r: &mut SplitMix64, sig: &[Ty], ctx: &mut Vec<Ty>, ty: &Ty, fuel: u32) -> Option<Lam> {
    let leaves: Vec<Lam> = ctx
        .iter()
        .enumerate()
        .filter(|(_, t)| *t == ty)
        .map(|(i, _)| Lam::Var(i))
        .chain(sig.iter().enumerate().filter(|(_, t)| *t == ty).map(|(i, _)| Lam::Meta(i)))
        .collect();
    if fuel == 0 {
        return if leaves.is_empty() { None } else { Some(r.pick(&leaves).clone()) };
    }
    match r.below(6) {
        0 | 1 if !leaves.is_empty() => Some(r.pick(&leaves).clone()),
        2 | 3 => {
            // A redex: ((lam s body) arg).
            let s = small_type(r);
            ctx.insert(0, s.clone());
            let body = lam_term(r, sig, ctx, ty, fuel - 1);
            ctx.remove(0);
            let arg = lam_term(r, sig, ctx, &s, fuel - 1)?;
            Some(Lam::App(Box::new(Lam::Abs(s, Box::new(body?))), Box::new(arg)))
        }
        4 => {
            if let Ty::Arrow(a, b) = ty {
                ctx.insert(0, (**a).clone());
                let body = lam_term(r, sig, ctx, b, fuel - 1);
                ctx.remove(0);
                Some(Lam::Abs((**a).clone(), Box::new(body?)))
            } else {
                None
            }
        }
        _ => {
            let s = small_type(r);
            let f = lam_term(r, sig, ctx, &Ty::arrow(s.clone(), ty.clone()), fuel - 1)?;
            let x = lam_term(r, sig, ctx, &s, fuel - 1)?;
            Some(Lam::App(Box::new(f), Box::new(x)))
        }
    }
}

/// A well-typed term in context `ctx` with at most [`MAX_LAMBDA_SIZE`]
/// nodes. `ty` is drawn at random when not given.
pub fn typed_term(r: &mut SplitMix64, sig: &[Ty], ctx: &[Ty], ty: Option<&Ty>) -> Lam {
    loop {
        let target = ty.cloned().unwrap_or_else(|| small_type(r));
        let mut ctx = ctx.to_vec();
        if let Some(t) = lam_term(r, sig, &mut ctx, &target, 3) {
            if t.size() <= MAX_LAMBDA_SIZE && t.size() >= 3 {
                return t;
            }
        }
    }
}

pub fn small_type_of(r: &mut SplitMix64) -> Ty {
    small_type(r)
}

/// A complete binary tree of depth `depth` as nested two-element lists
/// whose only #t leaf is at `path` (#f = left).
pub fn planted_tree(depth: u32, path: u64) -> Value {
    fn build(depth: u32, path: Option<u64>, bits_left: u32) -> Value {
        if bits_left == 0 {
            return Value::Bool(path.is_some());
        }
        let bit = path.map(|p| (p >> (bits_left - 1)) & 1);
        let left = build(depth, if bit == Some(0) { path } else { None }, bits_left - 1);
        let right = build(depth, if bit == Some(1) { path } else { None }, bits_left - 1);
        Value::list(vec![left, right])
    }
    build(depth, Some(path), depth)
}
