//! Shared fixtures: an independent reference evaluator, a random program
//! generator and planted-path helpers.
#![allow(dead_code)]

use dodona::interp::{resume, run_deterministic, Budget, Choicepoint, EvalError, Program, StepResult};
use dodona::rng::SplitMix64;
use dodona::suite;
use dodona::value::{Symbol, Value};

pub mod reference {
    //! A direct recursive evaluator over its own reader and value type.
    //! Shares no code with the library.

    use std::collections::HashMap;
    use std::rc::Rc;

    #[derive(Clone, Debug)]
    pub enum Datum {
        Int(i64),
        Bool(bool),
        Sym(String),
        List(Vec<Datum>),
    }

    pub fn read(text: &str) -> Result<Datum, String> {
        let spaced = text.replace('(', " ( ").replace(')', " ) ").replace('\'', " ' ");
        let toks: Vec<&str> = spaced.split_whitespace().collect();
        let mut pos = 0;
        let d = read_at(&toks, &mut pos)?;
        if pos != toks.len() {
            return Err("trailing input".into());
        }
        Ok(d)
    }

    fn read_at(toks: &[&str], pos: &mut usize) -> Result<Datum, String> {
        let t = *toks.get(*pos).ok_or("unexpected end")?;
        *pos += 1;
        match t {
            "(" => {
                let mut items = Vec::new();
                while toks.get(*pos) != Some(&")") {
                    if *pos >= toks.len() {
                        return Err("unclosed list".into());
                    }
                    items.push(read_at(toks, pos)?);
                }
                *pos += 1;
                Ok(Datum::List(items))
            }
            ")" => Err("unexpected )".into()),
            "'" => Ok(Datum::List(vec![Datum::Sym("quote".into()), read_at(toks, pos)?])),
            "#t" => Ok(Datum::Bool(true)),
            "#f" => Ok(Datum::Bool(false)),
            _ => Ok(t.parse().map(Datum::Int).unwrap_or_else(|_| Datum::Sym(t.into()))),
        }
    }

    #[derive(Clone)]
    pub enum Val {
        Int(i64),
        Bool(bool),
        Sym(String),
        List(Rc<Vec<Val>>),
        Closure(Rc<(Vec<String>, Datum, Env)>),
        Prim(String),
    }

    type Env = Rc<HashMap<String, Val>>;

    fn eq(a: &Val, b: &Val) -> bool {
        match (a, b) {
            (Val::Int(x), Val::Int(y)) => x == y,
            (Val::Bool(x), Val::Bool(y)) => x == y,
            (Val::Sym(x), Val::Sym(y)) => x == y,
            (Val::List(x), Val::List(y)) => x.len() == y.len() && x.iter().zip(y.iter()).all(|(p, q)| eq(p, q)),
            (Val::Prim(x), Val::Prim(y)) => x == y,
            (Val::Closure(x), Val::Closure(y)) => Rc::ptr_eq(x, y),
            _ => false,
        }
    }

    pub fn show(v: &Val) -> String {
        match v {
            Val::Int(i) => i.to_string(),
            Val::Bool(true) => "#t".into(),
            Val::Bool(false) => "#f".into(),
            Val::Sym(s) => s.clone(),
            Val::List(xs) => format!("({})", xs.iter().map(show).collect::<Vec<_>>().join(" ")),
            Val::Closure(_) => "<closure>".into(),
            Val::Prim(p) => format!("<prim:{p}>"),
        }
    }

    fn quoted(d: &Datum) -> Val {
        match d {
            Datum::Int(i) => Val::Int(*i),
            Datum::Bool(b) => Val::Bool(*b),
            Datum::Sym(s) => Val::Sym(s.clone()),
            Datum::List(xs) => Val::List(Rc::new(xs.iter().map(quoted).collect())),
        }
    }

    const PRIMS: &[&str] = &[
        "+", "-", "*", "/", "remainder", "max", "min", "=", "<", ">", "cons", "first", "rest", "list", "null?",
        "not", "and", "or", "length",
    ];

    fn int(v: &Val) -> Result<i64, String> {
        match v {
            Val::Int(i) => Ok(*i),
            _ => Err(format!("expected int, got {}", show(v))),
        }
    }

    fn boolean(v: &Val) -> Result<bool, String> {
        match v {
            Val::Bool(b) => Ok(*b),
            _ => Err(format!("expected bool, got {}", show(v))),
        }
    }

    fn list(v: &Val) -> Result<Rc<Vec<Val>>, String> {
        match v {
            Val::List(xs) => Ok(xs.clone()),
            _ => Err(format!("expected list, got {}", show(v))),
        }
    }

    fn fold(args: &[Val], init: Option<i64>, f: fn(i64, i64) -> Option<i64>) -> Result<Val, String> {
        let mut it = args.iter();
        let mut acc = match init {
            Some(i) => i,
            None => int(it.next().ok_or("arity")?)?,
        };
        for a in it {
            acc = f(acc, int(a)?).ok_or("overflow")?;
        }
        Ok(Val::Int(acc))
    }

    fn apply_prim(name: &str, args: &[Val]) -> Result<Val, String> {
        let two = || -> Result<(i64, i64), String> {
            match args {
                [a, b] => Ok((int(a)?, int(b)?)),
                _ => Err("arity".into()),
            }
        };
        let one = || -> Result<&Val, String> {
            match args {
                [a] => Ok(a),
                _ => Err("arity".into()),
            }
        };
        match name {
            "+" => fold(args, Some(0), i64::checked_add),
            "*" => fold(args, Some(1), i64::checked_mul),
            "-" if args.len() == 1 => Ok(Val::Int(int(&args[0])?.checked_neg().ok_or("overflow")?)),
            "-" => fold(args, None, i64::checked_sub),
            "max" => fold(args, None, |a, b| Some(a.max(b))),
            "min" => fold(args, None, |a, b| Some(a.min(b))),
            "/" => {
                let (a, b) = two()?;
                if b == 0 {
                    return Err("division by zero".into());
                }
                Ok(Val::Int(a.checked_div(b).ok_or("overflow")?))
            }
            "remainder" => {
                let (a, b) = two()?;
                if b == 0 {
                    return Err("division by zero".into());
                }
                Ok(Val::Int(a.checked_rem(b).ok_or("overflow")?))
            }
            "=" => Ok(Val::Bool(args.windows(2).all(|w| eq(&w[0], &w[1])))),
            "<" | ">" => {
                let xs = args.iter().map(int).collect::<Result<Vec<_>, _>>()?;
                let ok = xs.windows(2).all(|w| if name == "<" { w[0] < w[1] } else { w[0] > w[1] });
                Ok(Val::Bool(ok))
            }
            "cons" => match args {
                [h, t] => {
                    let mut v = vec![h.clone()];
                    v.extend(list(t)?.iter().cloned());
                    Ok(Val::List(Rc::new(v)))
                }
                _ => Err("arity".into()),
            },
            "first" => list(one()?)?.first().cloned().ok_or_else(|| "first of empty".into()),
            "rest" => {
                let xs = list(one()?)?;
                if xs.is_empty() {
                    return Err("rest of empty".into());
                }
                Ok(Val::List(Rc::new(xs[1..].to_vec())))
            }
            "list" => Ok(Val::List(Rc::new(args.to_vec()))),
            "null?" => Ok(Val::Bool(matches!(one()?, Val::List(xs) if xs.is_empty()))),
            "length" => Ok(Val::Int(list(one()?)?.len() as i64)),
            "not" => Ok(Val::Bool(!boolean(one()?)?)),
            "and" => Ok(Val::Bool(args.iter().map(boolean).collect::<Result<Vec<_>, _>>()?.iter().all(|b| *b))),
            "or" => Ok(Val::Bool(args.iter().map(boolean).collect::<Result<Vec<_>, _>>()?.iter().any(|b| *b))),
            _ => Err(format!("unknown primitive {name}")),
        }
    }

    fn apply(f: &Val, args: Vec<Val>, depth: usize) -> Result<Val, String> {
        match f {
            Val::Prim(name) => apply_prim(name, &args),
            Val::Closure(c) => {
                let (params, body, env) = &**c;
                if params.len() != args.len() {
                    return Err("arity".into());
                }
                let mut frame = (**env).clone();
                for (p, a) in params.iter().zip(args) {
                    frame.insert(p.clone(), a);
                }
                eval_in(body, &Rc::new(frame), depth + 1)
            }
            _ => Err(format!("not a function: {}", show(f))),
        }
    }

    fn eval_in(d: &Datum, env: &Env, depth: usize) -> Result<Val, String> {
        if depth > 10_000 {
            return Err("too deep".into());
        }
        match d {
            Datum::Int(i) => Ok(Val::Int(*i)),
            Datum::Bool(b) => Ok(Val::Bool(*b)),
            Datum::Sym(s) => match env.get(s) {
                Some(v) => Ok(v.clone()),
                None if PRIMS.contains(&s.as_str()) => Ok(Val::Prim(s.clone())),
                None => Err(format!("unbound {s}")),
            },
            Datum::List(items) => {
                let head = match items.first() {
                    Some(Datum::Sym(s)) => Some(s.as_str()),
                    Some(_) => None,
                    None => return Err("empty application".into()),
                };
                match head {
                    Some("quote") => Ok(quoted(&items[1])),
                    Some("if") => match boolean(&eval_in(&items[1], env, depth + 1)?) {
                        Ok(false) => eval_in(&items[3], env, depth + 1),
                        _ => eval_in(&items[2], env, depth + 1),
                    },
                    Some("lambda") => {
                        let Datum::List(ps) = &items[1] else {
                            return Err("bad lambda".into());
                        };
                        let params = ps
                            .iter()
                            .map(|p| match p {
                                Datum::Sym(s) => Ok(s.clone()),
                                _ => Err("bad parameter".to_string()),
                            })
                            .collect::<Result<_, _>>()?;
                        Ok(Val::Closure(Rc::new((params, items[2].clone(), env.clone()))))
                    }
                    Some("let") => {
                        let Datum::List(bs) = &items[1] else {
                            return Err("bad let".into());
                        };
                        let mut frame = (**env).clone();
                        for b in bs {
                            let Datum::List(pair) = b else { return Err("bad binding".into()) };
                            let Datum::Sym(name) = &pair[0] else { return Err("bad binding".into()) };
                            frame.insert(name.clone(), eval_in(&pair[1], env, depth + 1)?);
                        }
                        eval_in(&items[2], &Rc::new(frame), depth + 1)
                    }
                    _ => {
                        let f = eval_in(&items[0], env, depth + 1)?;
                        let args = items[1..]
                            .iter()
                            .map(|a| eval_in(a, env, depth + 1))
                            .collect::<Result<Vec<_>, _>>()?;
                        apply(&f, args, depth)
                    }
                }
            }
        }
    }

    /// The printed value of `text`, or `None` on any error.
    pub fn eval(text: &str) -> Option<String> {
        let d = read(text).ok()?;
        eval_in(&d, &Rc::new(HashMap::new()), 0).ok().map(|v| show(&v))
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Ty {
    Int,
    Bool,
    List,
}

/// Random well-scoped programs over ints, booleans and int lists.
/// Type errors cannot occur, but runtime errors (division by zero, `first`
/// of an empty list, overflow) can.
pub struct ProgramGen {
    rng: SplitMix64,
    vars: Vec<(String, Ty)>,
    fresh: usize,
    /// Where to put the single `choose`, counted over choice-eligible
    /// positions in generation order.
    choice_slot: Option<usize>,
    slots_seen: usize,
    /// Literal choices of the placed `choose` and its position's type.
    placed: Option<(Ty, Vec<String>)>,
    in_lambda: usize,
}

impl ProgramGen {
    pub fn new(seed: u64) -> ProgramGen {
        ProgramGen {
            rng: SplitMix64::new(seed),
            vars: Vec::new(),
            fresh: 0,
            choice_slot: None,
            slots_seen: 0,
            placed: None,
            in_lambda: 0,
        }
    }

    /// A deterministic program of type int, bool or list.
    pub fn program(&mut self, depth: u32) -> String {
        let ty = *self.rng.pick(&[Ty::Int, Ty::Int, Ty::Bool, Ty::List]);
        self.expr(ty, depth)
    }

    /// A program with one `choose` over a literal list outside any lambda
    /// body, and the printed choices. `None` if the chosen slot was never
    /// reached.
    pub fn single_choice(&mut self, depth: u32) -> Option<(String, Vec<String>)> {
        let slot = self.rng.below(6) as usize;
        self.choice_slot = Some(slot);
        let text = self.program(depth);
        let (_, choices) = self.placed.take()?;
        Some((text, choices))
    }

    fn name(&mut self) -> String {
        self.fresh += 1;
        format!("v{}", self.fresh)
    }

    fn var_of(&mut self, ty: Ty) -> Option<String> {
        let vs: Vec<String> = self.vars.iter().filter(|(_, t)| *t == ty).map(|(n, _)| n.clone()).collect();
        if vs.is_empty() {
            None
        } else {
            Some(self.rng.pick(&vs).clone())
        }
    }

    fn literal(&mut self, ty: Ty) -> String {
        match ty {
            Ty::Int => (self.rng.range(-5, 21)).to_string(),
            Ty::Bool => if self.rng.chance(1, 2) { "#t" } else { "#f" }.into(),
            Ty::List => {
                let n = self.rng.below(4);
                let xs: Vec<String> = (0..n).map(|_| self.rng.range(0, 10).to_string()).collect();
                format!("'({})", xs.join(" "))
            }
        }
    }

    fn choice(&mut self, ty: Ty) -> Option<String> {
        if self.in_lambda > 0 || self.placed.is_some() {
            return None;
        }
        let slot = self.choice_slot?;
        let here = self.slots_seen;
        self.slots_seen += 1;
        if here != slot {
            return None;
        }
        let n = 1 + self.rng.below(4) as usize;
        let choices: Vec<String> = (0..n)
            .map(|_| match ty {
                Ty::Int => self.rng.range(-3, 10).to_string(),
                Ty::Bool => if self.rng.chance(1, 2) { "#t" } else { "#f" }.into(),
                Ty::List => unreachable!(),
            })
            .collect();
        self.placed = Some((ty, choices.clone()));
        Some(format!("(choose '({}))", choices.join(" ")))
    }

    fn expr(&mut self, ty: Ty, depth: u32) -> String {
        if ty != Ty::List {
            if let Some(c) = self.choice(ty) {
                return c;
            }
        }
        if depth == 0 || self.rng.chance(1, 5) {
            if self.rng.chance(1, 2) {
                if let Some(v) = self.var_of(ty) {
                    return v;
                }
            }
            return self.literal(ty);
        }
        let d = depth - 1;
        match self.rng.below(4) {
            0 => {
                let c = self.expr(Ty::Bool, d);
                let t = self.expr(ty, d);
                let e = self.expr(ty, d);
                return format!("(if {c} {t} {e})");
            }
            1 => {
                let bty = *self.rng.pick(&[Ty::Int, Ty::Bool, Ty::List]);
                let value = self.expr(bty, d);
                let name = self.name();
                self.vars.push((name.clone(), bty));
                let body = self.expr(ty, d);
                self.vars.pop();
                return format!("(let (({name} {value})) {body})");
            }
            2 if self.rng.chance(1, 2) => {
                let pty = *self.rng.pick(&[Ty::Int, Ty::Bool, Ty::List]);
                let p = self.name();
                let arg = self.expr(pty, d);
                self.vars.push((p.clone(), pty));
                self.in_lambda += 1;
                let body = self.expr(ty, d);
                self.in_lambda -= 1;
                self.vars.pop();
                let f = self.name();
                let arg2 = self.expr(pty, d);
                let (a, b) = (format!("({f} {arg})"), format!("({f} {arg2})"));
                let combined = match ty {
                    Ty::Int => format!("({} {a} {b})", self.rng.pick(&["+", "max", "min"])),
                    Ty::Bool => format!("({} {a} {b})", self.rng.pick(&["and", "or"])),
                    Ty::List => format!("(cons (length {a}) {b})"),
                };
                return format!("(let (({f} (lambda ({p}) {body}))) {combined})");
            }
            _ => {}
        }
        match ty {
            Ty::Int => {
                let op = *self.rng.pick(&["+", "-", "*", "/", "remainder", "max", "min", "length", "first"]);
                match op {
                    "length" => format!("(length {})", self.expr(Ty::List, d)),
                    "first" => format!("(first {})", self.expr(Ty::List, d)),
                    _ => format!("({op} {} {})", self.expr(Ty::Int, d), self.expr(Ty::Int, d)),
                }
            }
            Ty::Bool => {
                let op = *self.rng.pick(&["<", ">", "=", "not", "null?", "and", "or"]);
                match op {
                    "not" => format!("(not {})", self.expr(Ty::Bool, d)),
                    "null?" => format!("(null? {})", self.expr(Ty::List, d)),
                    "and" | "or" => format!("({op} {} {})", self.expr(Ty::Bool, d), self.expr(Ty::Bool, d)),
                    _ => format!("({op} {} {})", self.expr(Ty::Int, d), self.expr(Ty::Int, d)),
                }
            }
            Ty::List => match self.rng.below(3) {
                0 => format!("(cons {} {})", self.expr(Ty::Int, d), self.expr(Ty::List, d)),
                1 => format!("(rest {})", self.expr(Ty::List, d)),
                _ => format!("(list {} {})", self.expr(Ty::Int, d), self.expr(Ty::Int, d)),
            },
        }
    }
}

/// Runs `text` on the library interpreter without the standard library.
pub fn run_library(text: &str) -> Option<String> {
    let p = Program::from_source(text).ok()?;
    let main = p.main()?;
    dodona::interp::run_deterministic(main, p.env(), &mut Budget::new(1_000_000))
        .ok()
        .map(|v| v.to_string())
}

/// Outcome of a deterministic run: printed value or error message.
pub fn det(p: &Program, text: &str) -> Result<String, EvalError> {
    let e = p.parse_expr(text).unwrap();
    run_deterministic(&e, p.env(), &mut Budget::new(1_000_000)).map(|v| v.to_string())
}

/// Checks substitution equivalence on one single-choice program. Returns
/// false if the program never reached its `choose`.
pub fn resumption_holds(text: &str, choices: &[String]) -> bool {
    let p = Program::new();
    let e = p.parse_expr(text).unwrap();
    let choose = format!("(choose '({}))", choices.join(" "));
    let start = dodona::interp::step(e, p.env().clone(), 0, dodona::interp::Continuation::new(), &mut Budget::new(1_000_000));
    let cp = match start {
        Ok(StepResult::Suspended(cp)) => cp,
        Ok(StepResult::Terminal(v)) => {
            for c in choices {
                assert_eq!(det(&p, &text.replacen(&choose, c, 1)), Ok(v.to_string()), "{text}");
            }
            return false;
        }
        Err(err) => {
            // The error struck before the choice was reached, so every
            // substitution fails the same way.
            for c in choices {
                assert_eq!(det(&p, &text.replacen(&choose, c, 1)), Err(err.clone()), "{text}");
            }
            return false;
        }
    };
    let shown: Vec<String> = cp.choices.iter().map(Value::to_string).collect();
    assert_eq!(shown, choices, "{text}");
    for (i, c) in choices.iter().enumerate() {
        let resumed = match resume(&cp, i, &mut Budget::new(1_000_000)) {
            Ok(StepResult::Terminal(v)) => Ok(v.to_string()),
            Ok(StepResult::Suspended(_)) => panic!("second choicepoint in {text}"),
            Err(e) => Err(e),
        };
        assert_eq!(resumed, det(&p, &text.replacen(&choose, c, 1)), "choice {c} in {text}");
    }
    true
}

/// A planted-path program over the list2 encoding, with its path as
/// choice indices.
pub fn planted_program(depth: u32, seed: u64) -> (Program, Vec<usize>) {
    let bits = SplitMix64::stream(seed, "planted").below(1 << depth);
    let tree = suite::terms::planted_tree(depth, bits);
    let mut p = suite::stdlib().unwrap();
    p.load(&format!("(walk-list2 '{tree})")).unwrap();
    let path = (0..depth).rev().map(|i| ((bits >> i) & 1) as usize).collect();
    (p, path)
}

fn contains_true(v: &Value) -> bool {
    match v {
        Value::Bool(b) => *b,
        Value::Pair(_) => v.list_to_vec().unwrap().iter().any(contains_true),
        _ => false,
    }
}

/// At a planted-path choicepoint, the index of the child that holds the
/// good leaf. Reads the walker's `t` from the innermost segment.
pub fn planted_correct(cp: &Choicepoint) -> Option<usize> {
    let t = cp.cstack.iter().find_map(|s| s.env.try_lookup(Symbol::new("t")))?;
    let kids = t.list_to_vec()?;
    kids.iter().position(contains_true)
}

/// Whether the walker at this choicepoint is still on the planted path.
pub fn planted_alive(cp: &Choicepoint) -> bool {
    planted_correct(cp).is_some()
}

/// Structural invariants every stored graph must satisfy.
pub fn check_graph(d: &dodona::dataset::Datapoint) -> Result<(), String> {
    use dodona::graph::{ChoiceGraph, EdgeType};
    let text = d.graph.get();
    let g = ChoiceGraph::from_json(text).map_err(|e| e.to_string())?;
    if g.to_json() != text {
        return Err("graph does not re-serialize byte-identically".into());
    }
    if g.choices.len() != d.num_choices {
        return Err(format!("{} choice nodes for {} choices", g.choices.len(), d.num_choices));
    }
    if d.correct >= d.num_choices {
        return Err("correct index out of range".into());
    }
    let n = g.nodes.len() as u32;
    if g.root >= n || g.edges.iter().any(|e| e.0 >= n || e.1 >= n) || g.choices.iter().any(|&c| c >= n) {
        return Err("node id out of range".into());
    }
    let choice_nodes: Vec<u32> = (0..n).filter(|&i| g.nodes[i as usize] == "CHOICE").collect();
    let [choice] = choice_nodes[..] else {
        return Err(format!("{} CHOICE nodes", choice_nodes.len()));
    };
    for &c in &g.choices {
        if !g.edges.contains(&(c, choice, EdgeType::ChoiceOption)) {
            return Err(format!("choice node {c} is not wired to CHOICE"));
        }
    }
    let options = g.edges.iter().filter(|e| e.1 == choice && e.2 == EdgeType::ChoiceOption).count();
    let mut distinct = g.choices.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if options != distinct.len() {
        return Err(format!("{options} CHOICE-OPTION edges for {} distinct choices", distinct.len()));
    }
    let orphans = g.orphans();
    if !orphans.is_empty() {
        return Err(format!("{} orphan nodes", orphans.len()));
    }
    if g.edges.windows(2).any(|w| (w[0].0, w[0].1, w[0].2.name()) >= (w[1].0, w[1].1, w[1].2.name())) {
        return Err("edges not sorted and deduplicated".into());
    }
    g.decode_choices().map_err(|e| e.to_string())?;
    Ok(())
}
