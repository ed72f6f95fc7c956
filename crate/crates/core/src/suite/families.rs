//! Task definitions for the eight families.

use super::terms::{self, Ty};
use super::Family;
use crate::rng::SplitMix64;
use crate::value::Value;

/// Type of a task's output, selecting its chooser and inverse.
#[derive(Clone, Debug)]
pub enum Output {
    Bool,
    Digit,
    Nat,
    Int,
    DigitList,
    BoolList,
    DigitTree,
    FoTerm,
    Horner(&'static str),
    LambdaTerm,
    Type,
    /// Walk tasks: labels are the path itself.
    Path,
}

impl Output {
    pub fn chooser(&self) -> Option<String> {
        Some(match self {
            Output::Bool => "(choose-bool)".into(),
            Output::Digit => "(choose-digit)".into(),
            Output::Nat => "(choose-nat)".into(),
            Output::Int => "(choose-int)".into(),
            Output::DigitList => "(choose-list choose-digit)".into(),
            Output::BoolList => "(choose-list choose-bool)".into(),
            Output::DigitTree => "(choose-digit-tree)".into(),
            Output::FoTerm => "(choose-fo-term)".into(),
            Output::Horner(vars) => format!("(choose-horner '{vars})"),
            Output::LambdaTerm => "(choose-lterm)".into(),
            Output::Type => "(choose-type)".into(),
            Output::Path => return None,
        })
    }

    pub fn inverse(&self) -> String {
        match self {
            Output::Bool => "(invert-bool v)".into(),
            Output::Digit => "(invert-digit v)".into(),
            Output::Nat => "(invert-nat v)".into(),
            Output::Int => "(invert-int v)".into(),
            Output::DigitList => "(invert-list invert-digit v)".into(),
            Output::BoolList => "(invert-list invert-bool v)".into(),
            Output::DigitTree => "(invert-tree invert-digit v)".into(),
            Output::FoTerm => "(invert-tree invert-fo-leaf v)".into(),
            Output::Horner(vars) => format!("(invert-horner '{vars} v)"),
            Output::LambdaTerm => "(invert-lterm v)".into(),
            Output::Type => "(invert-type v)".into(),
            Output::Path => "v".into(),
        }
    }
}

pub type ArgGen = Box<dyn Fn(&mut SplitMix64) -> Value + Send + Sync>;

/// A task before its argument pool is fixed.
pub struct Draft {
    pub name: String,
    pub family: Family,
    /// Definitions; must define `task-fn`.
    pub defs: String,
    pub output: Output,
    /// Arguments are either listed up front or drawn from a generator.
    pub fixed_args: Option<Vec<Value>>,
    pub gen_arg: Option<ArgGen>,
    /// Function applied to the pooled datum to build the argument.
    pub arg_wrap: Option<&'static str>,
    /// For walk tasks, the walker run by each episode.
    pub walker: Option<&'static str>,
    /// Rejects targets outside the output chooser's range.
    pub accept: fn(&Value) -> bool,
}

fn any_target(_: &Value) -> bool {
    true
}

fn draft(family: Family, name: &str, defs: &str, output: Output, gen: ArgGen) -> Draft {
    Draft {
        name: name.to_owned(),
        family,
        defs: defs.to_owned(),
        output,
        fixed_args: None,
        gen_arg: Some(gen),
        arg_wrap: None,
        walker: None,
        accept: any_target,
    }
}

fn digits(max: u64) -> ArgGen {
    Box::new(move |r| terms::list_of(r, max, terms::digit))
}

fn bools(max: u64) -> ArgGen {
    Box::new(move |r| terms::list_of(r, max, terms::boolean))
}

fn index_and_list(allow_end: bool) -> ArgGen {
    Box::new(move |r| {
        let xs = terms::list_of(r, 6, terms::digit).list_to_vec().unwrap();
        let xs = if xs.is_empty() && !allow_end { vec![terms::digit(r)] } else { xs };
        let bound = if allow_end { xs.len() + 1 } else { xs.len() };
        let k = r.below(bound as u64) as i64;
        Value::list(vec![Value::Int(k), Value::list(xs)])
    })
}

fn digit_tree(r: &mut SplitMix64) -> Value {
    terms::tree(r, 3, terms::digit)
}

fn bool_tree(r: &mut SplitMix64) -> Value {
    terms::tree(r, 3, terms::boolean)
}

pub fn identity() -> Vec<Draft> {
    let f = Family::Identity;
    let defs = "(define task-fn identity)";
    let mut bool_task = draft(f, "bool", defs, Output::Bool, Box::new(terms::boolean));
    bool_task.fixed_args = Some(vec![Value::Bool(false), Value::Bool(true)]);
    let mut digit_task = draft(f, "digit", defs, Output::Digit, Box::new(terms::digit));
    digit_task.fixed_args = Some((0..10).map(Value::Int).collect());
    vec![
        bool_task,
        digit_task,
        draft(f, "digit-list", defs, Output::DigitList, digits(6)),
        draft(f, "bool-list", defs, Output::BoolList, bools(6)),
        draft(f, "digit-tree", defs, Output::DigitTree, Box::new(digit_tree)),
    ]
}

const OPS: &[(&str, &str)] = &[
    ("+", "plus"),
    ("-", "minus"),
    ("*", "times"),
    ("/", "div"),
    ("remainder", "rem"),
    ("max", "max"),
    ("min", "min"),
];

/// Expression shapes over digit holes: `(op _ _)`, `(op _ (op2 _ _))` or
/// `(op (op2 _ _) _)`. The first two are always `(+ _ _)` and
/// `(+ _ (* _ _))`.
pub fn arithmetic(r: &mut SplitMix64, count: usize) -> Vec<Draft> {
    let mut shapes: Vec<(String, String, usize)> = vec![
        ("plus".into(), "(+ (nth 0 xs) (nth 1 xs))".into(), 2),
        ("plus-times-r".into(), "(+ (nth 0 xs) (* (nth 1 xs) (nth 2 xs)))".into(), 3),
    ];
    while shapes.len() < count {
        let (op, name) = *r.pick(OPS);
        let (op2, name2) = *r.pick(OPS);
        let shape = match r.below(3) {
            0 => (name.to_string(), format!("({op} (nth 0 xs) (nth 1 xs))"), 2),
            1 => (
                format!("{name}-{name2}-r"),
                format!("({op} (nth 0 xs) ({op2} (nth 1 xs) (nth 2 xs)))"),
                3,
            ),
            _ => (
                format!("{name}-{name2}-l"),
                format!("({op} ({op2} (nth 0 xs) (nth 1 xs)) (nth 2 xs))"),
                3,
            ),
        };
        if !shapes.iter().any(|s| s.0 == shape.0) {
            shapes.push(shape);
        }
    }
    shapes
        .into_iter()
        .map(|(name, body, holes)| {
            let gen: ArgGen =
                Box::new(move |r| Value::list((0..holes).map(|_| terms::digit(r)).collect::<Vec<_>>()));
            draft(
                Family::Arithmetic,
                &name,
                &format!("(define (task-fn xs) {body})"),
                Output::Int,
                gen,
            )
        })
        .collect()
}

const PREDICATES: &[&str] = &["even?", "zero?", "big?"];
const DIGIT_MAPS: &[&str] = &["inc-mod", "double-mod", "complement"];

fn trim(p: &str) -> &str {
    p.trim_end_matches('?')
}

pub fn lists(r: &mut SplitMix64) -> Vec<Draft> {
    let f = Family::Lists;
    let p_exists = *r.pick(PREDICATES);
    let p_count = *r.pick(PREDICATES);
    let p_filter = *r.pick(PREDICATES);
    let map_fn = *r.pick(DIGIT_MAPS);
    let pair_of_lists: ArgGen = Box::new(|r| {
        Value::list(vec![terms::list_of(r, 4, terms::digit), terms::list_of(r, 4, terms::digit)])
    });
    let erase_arg: ArgGen = Box::new(|r| {
        let xs = terms::list_of(r, 6, terms::digit);
        let d = match xs.list_to_vec() {
            Some(v) if !v.is_empty() && r.chance(2, 3) => r.pick(&v).clone(),
            _ => terms::digit(r),
        };
        Value::list(vec![d, xs])
    });
    vec![
        draft(f, "digit-length", "(define (task-fn xs) (length xs))", Output::Nat, digits(8)),
        draft(f, "bool-length", "(define (task-fn xs) (length xs))", Output::Nat, bools(8)),
        draft(f, "take", "(define (task-fn a) (take (first a) (second a)))", Output::DigitList, index_and_list(true)),
        draft(f, "drop", "(define (task-fn a) (drop (first a) (second a)))", Output::DigitList, index_and_list(true)),
        draft(f, "nth", "(define (task-fn a) (nth (first a) (second a)))", Output::Digit, index_and_list(false)),
        draft(
            f,
            &format!("exists-{}", trim(p_exists)),
            &format!("(define (task-fn xs) (exists {p_exists} xs))"),
            Output::Bool,
            digits(6),
        ),
        draft(
            f,
            &format!("count-{}", trim(p_count)),
            &format!("(define (task-fn xs) (count {p_count} xs))"),
            Output::Nat,
            digits(6),
        ),
        draft(f, "erase", "(define (task-fn a) (erase (first a) (second a)))", Output::DigitList, erase_arg),
        draft(
            f,
            &format!("filter-{}", trim(p_filter)),
            &format!("(define (task-fn xs) (filter {p_filter} xs))"),
            Output::DigitList,
            digits(6),
        ),
        draft(
            f,
            &format!("map-{map_fn}"),
            &format!("(define (task-fn xs) (map {map_fn} xs))"),
            Output::DigitList,
            digits(6),
        ),
        draft(f, "append", "(define (task-fn a) (append (first a) (second a)))", Output::DigitList, pair_of_lists),
        draft(f, "reverse", "(define (task-fn xs) (reverse xs))", Output::DigitList, digits(6)),
        draft(f, "sum", "(define (task-fn xs) (sum xs))", Output::Nat, digits(6)),
        draft(f, "all", "(define (task-fn xs) (all xs))", Output::Bool, bools(6)),
        draft(f, "any", "(define (task-fn xs) (any xs))", Output::Bool, bools(6)),
        draft(f, "parity", "(define (task-fn xs) (parity xs))", Output::Bool, bools(6)),
    ]
}

pub fn trees(r: &mut SplitMix64) -> Vec<Draft> {
    let f = Family::Trees;
    let p_all = *r.pick(PREDICATES);
    let p_any = *r.pick(PREDICATES);
    let map_fn = *r.pick(DIGIT_MAPS);
    let path_arg: ArgGen = Box::new(|r| {
        let t = digit_tree(r);
        Value::list(vec![terms::path_into(r, &t), t])
    });
    vec![
        draft(f, "count-inner", "(define (task-fn t) (count-inner t))", Output::Nat, Box::new(digit_tree)),
        draft(f, "count-leaves", "(define (task-fn t) (count-leaves t))", Output::Nat, Box::new(digit_tree)),
        draft(f, "count-nodes", "(define (task-fn t) (count-nodes t))", Output::Nat, Box::new(digit_tree)),
        draft(f, "depth", "(define (task-fn t) (depth t))", Output::Nat, Box::new(digit_tree)),
        draft(
            f,
            "subtree-at",
            "(define (task-fn a) (subtree-at (first a) (second a)))",
            Output::DigitTree,
            path_arg,
        ),
        draft(
            f,
            &format!("all-leaves-{}", trim(p_all)),
            &format!("(define (task-fn t) (all-leaves {p_all} t))"),
            Output::Bool,
            Box::new(digit_tree),
        ),
        draft(
            f,
            &format!("any-leaf-{}", trim(p_any)),
            &format!("(define (task-fn t) (any-leaf {p_any} t))"),
            Output::Bool,
            Box::new(digit_tree),
        ),
        draft(
            f,
            &format!("map-leaves-{map_fn}"),
            &format!("(define (task-fn t) (map-leaves {map_fn} t))"),
            Output::DigitTree,
            Box::new(digit_tree),
        ),
        draft(f, "and-leaves", "(define (task-fn t) (all (leaves t)))", Output::Bool, Box::new(bool_tree)),
        draft(f, "or-leaves", "(define (task-fn t) (any (leaves t)))", Output::Bool, Box::new(bool_tree)),
    ]
}

const VAR_SETS: &[(&str, &str, usize)] = &[("x", "(x)", 1), ("xy", "(x y)", 2), ("yz", "(y z)", 2), ("xyz", "(x y z)", 3)];

pub fn polynomials() -> Vec<Draft> {
    let f = Family::Polynomials;
    let mut out = Vec::new();
    for &(name, vars, n) in VAR_SETS {
        let gen: ArgGen = Box::new(move |r| terms::dense_poly(r, n));
        out.push(draft(
            f,
            &format!("to-horner-{name}"),
            &format!("(define (task-fn p) (to-horner '{vars} p))"),
            Output::Horner(vars),
            gen,
        ));
    }
    for &(name, vars, n) in VAR_SETS.iter().filter(|v| v.0 != "yz") {
        let gen: ArgGen = Box::new(move |r| Value::list(vec![terms::dense_poly(r, n), terms::dense_poly(r, n)]));
        out.push(draft(
            f,
            &format!("horner-add-{name}"),
            &format!("(define (task-fn ab) (horner-add '{vars} (first ab) (second ab)))"),
            Output::Horner(vars),
            gen,
        ));
    }
    out
}

pub fn first_order(r: &mut SplitMix64, count: usize) -> Vec<Draft> {
    (0..count)
        .map(|i| {
            let mut rules = terms::rule_set(r);
            if i == 0 {
                let x = terms::Term::Var("x");
                rules.insert(
                    0,
                    (terms::Term::App("f", vec![x.clone()]), terms::Term::App("g", vec![x])),
                );
            }
            let defs = format!(
                "(define task-rules '{})\n(define (task-fn t) (normalize task-rules t))",
                terms::rules_value(&rules)
            );
            draft(
                Family::FirstOrder,
                &format!("rules-{i}"),
                &defs,
                Output::FoTerm,
                Box::new(|r| terms::ground_term(r).to_value()),
            )
        })
        .collect()
}

/// Whether a lambda term fits the output chooser (indices below 10,
/// metavariables below 3).
fn lterm_in_range(v: &Value) -> bool {
    let Some(items) = v.list_to_vec() else {
        return false;
    };
    let small = |x: &Value, bound: i64| matches!(x, Value::Int(i) if (0..bound).contains(i));
    match items.first().map(|t| t.to_string()).as_deref() {
        Some("var") => small(&items[1], 10),
        Some("mv") => small(&items[1], 3),
        Some("lam") => lterm_in_range(&items[2]),
        Some("app") => lterm_in_range(&items[1]) && lterm_in_range(&items[2]),
        _ => false,
    }
}

pub fn higher_order() -> Vec<Draft> {
    let f = Family::HigherOrder;
    let mut out = Vec::new();
    for s in 0..2 {
        let sig = terms::signature(s);
        let sig_text = terms::signature_value(&sig).to_string();
        let closed = {
            let sig = sig.clone();
            move |r: &mut SplitMix64| terms::typed_term(r, &sig, &[], None).to_value()
        };
        let c1 = closed.clone();
        let mut beta = draft(f, &format!("beta-nf-sig{s}"), "(define (task-fn t) (bnf t))", Output::LambdaTerm, Box::new(c1));
        beta.accept = lterm_in_range;
        let c2 = closed.clone();
        let mut beta_eta = draft(f, &format!("beta-eta-nf-sig{s}"), "(define (task-fn t) (benf t))", Output::LambdaTerm, Box::new(c2));
        beta_eta.accept = lterm_in_range;
        let sig2 = sig.clone();
        let subst_arg: ArgGen = Box::new(move |r| {
            let ty: Ty = terms::small_type_of(r);
            let body = terms::typed_term(r, &sig2, &[ty.clone()], None);
            let s = terms::typed_term(r, &sig2, &[], Some(&ty));
            Value::list(vec![body.to_value(), s.to_value()])
        });
        let mut subst = draft(
            f,
            &format!("subst-beta-eta-sig{s}"),
            "(define (task-fn ts) (benf (beta (first ts) (second ts))))",
            Output::LambdaTerm,
            subst_arg,
        );
        subst.accept = lterm_in_range;
        let typing = draft(
            f,
            &format!("type-of-sig{s}"),
            &format!("(define task-sig '{sig_text})\n(define (task-fn t) (type-of task-sig '() t))"),
            Output::Type,
            Box::new(closed),
        );
        out.extend([beta, beta_eta, subst, typing]);
    }
    out
}

pub fn planted_path(r: &mut SplitMix64) -> Vec<Draft> {
    let encodings: [(&str, Option<&'static str>, &'static str); 3] = [
        ("list2", None, "walk-list2"),
        ("cons", Some("list2->cons"), "walk-cons"),
        ("church", Some("list2->church"), "walk-church"),
    ];
    let mut out = Vec::new();
    for (enc, wrap, walker) in encodings {
        for depth in 3..=5u32 {
            let mut paths: Vec<u64> = (0..1u64 << depth).collect();
            r.shuffle(&mut paths);
            let mut d = draft(
                Family::PlantedPath,
                &format!("{enc}-depth{depth}"),
                &format!("(define (task-fn t) (find-path-{enc} t))"),
                Output::Path,
                Box::new(terms::boolean),
            );
            d.fixed_args = Some(paths.into_iter().map(|p| terms::planted_tree(depth, p)).collect());
            d.gen_arg = None;
            d.arg_wrap = wrap;
            d.walker = Some(walker);
            out.push(d);
        }
    }
    out
}

/// Every draft of `family`, drawing task parameters from `r`.
pub fn drafts(family: Family, r: &mut SplitMix64) -> Vec<Draft> {
    match family {
        Family::Identity => identity(),
        Family::Arithmetic => arithmetic(r, 8),
        Family::Lists => lists(r),
        Family::Trees => trees(r),
        Family::Polynomials => polynomials(),
        Family::FirstOrder => first_order(r, 6),
        Family::HigherOrder => higher_order(),
        Family::PlantedPath => planted_path(r),
    }
}
