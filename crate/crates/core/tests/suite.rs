mod common;

use common::reference::{read, Datum};
use dodona::rng::SplitMix64;
use dodona::search::{enumerate, replay};
use dodona::suite::{self, terms, Family, SuiteConfig};
use dodona::value::Value;

fn small_config(families: Vec<Family>, max_results: usize) -> SuiteConfig {
    SuiteConfig {
        families,
        max_results,
        ..SuiteConfig::default()
    }
}

fn show(d: &Datum) -> String {
    match d {
        Datum::Int(i) => i.to_string(),
        Datum::Bool(b) => if *b { "#t" } else { "#f" }.into(),
        Datum::Sym(s) => s.clone(),
        Datum::List(xs) => format!("({})", xs.iter().map(show).collect::<Vec<_>>().join(" ")),
    }
}

fn items(d: &Datum) -> &[Datum] {
    match d {
        Datum::List(xs) => xs,
        _ => panic!("expected a list, got {}", show(d)),
    }
}

fn int(d: &Datum) -> i64 {
    match d {
        Datum::Int(i) => *i,
        _ => panic!("expected an int, got {}", show(d)),
    }
}

mod lambda {
    //! βη normal forms by leftmost-outermost reduction of any β or η redex.

    use super::{int, items, show, Datum};

    #[derive(Clone, PartialEq, Debug)]
    pub enum T {
        Var(i64),
        Mv(i64),
        Lam(String, Box<T>),
        App(Box<T>, Box<T>),
    }

    pub fn parse(d: &Datum) -> T {
        let xs = items(d);
        match show(&xs[0]).as_str() {
            "var" => T::Var(int(&xs[1])),
            "mv" => T::Mv(int(&xs[1])),
            "lam" => T::Lam(show(&xs[1]), Box::new(parse(&xs[2]))),
            "app" => T::App(Box::new(parse(&xs[1])), Box::new(parse(&xs[2]))),
            other => panic!("bad tag {other}"),
        }
    }

    pub fn print(t: &T) -> String {
        match t {
            T::Var(i) => format!("(var {i})"),
            T::Mv(i) => format!("(mv {i})"),
            T::Lam(ty, b) => format!("(lam {ty} {})", print(b)),
            T::App(f, x) => format!("(app {} {})", print(f), print(x)),
        }
    }

    fn shift(t: &T, d: i64, cutoff: i64) -> T {
        match t {
            T::Var(i) if *i >= cutoff => T::Var(i + d),
            T::Var(_) | T::Mv(_) => t.clone(),
            T::Lam(ty, b) => T::Lam(ty.clone(), Box::new(shift(b, d, cutoff + 1))),
            T::App(f, x) => T::App(Box::new(shift(f, d, cutoff)), Box::new(shift(x, d, cutoff))),
        }
    }

    /// Replaces index `j` by `s` and lowers the indices above it.
    fn instantiate(t: &T, j: i64, s: &T) -> T {
        match t {
            T::Var(i) if *i == j => shift(s, j, 0),
            T::Var(i) if *i > j => T::Var(i - 1),
            T::Var(_) | T::Mv(_) => t.clone(),
            T::Lam(ty, b) => T::Lam(ty.clone(), Box::new(instantiate(b, j + 1, s))),
            T::App(f, x) => T::App(Box::new(instantiate(f, j, s)), Box::new(instantiate(x, j, s))),
        }
    }

    fn occurs(t: &T, j: i64) -> bool {
        match t {
            T::Var(i) => *i == j,
            T::Mv(_) => false,
            T::Lam(_, b) => occurs(b, j + 1),
            T::App(f, x) => occurs(f, j) || occurs(x, j),
        }
    }

    fn step(t: &T) -> Option<T> {
        match t {
            T::App(f, x) => {
                if let T::Lam(_, body) = &**f {
                    return Some(instantiate(body, 0, x));
                }
                step(f)
                    .map(|f2| T::App(Box::new(f2), x.clone()))
                    .or_else(|| step(x).map(|x2| T::App(f.clone(), Box::new(x2))))
            }
            T::Lam(ty, body) => {
                if let T::App(g, a) = &**body {
                    if **a == T::Var(0) && !occurs(g, 0) {
                        return Some(shift(g, -1, 0));
                    }
                }
                step(body).map(|b| T::Lam(ty.clone(), Box::new(b)))
            }
            _ => None,
        }
    }

    pub fn normalize(t: &T) -> T {
        let mut t = t.clone();
        for _ in 0..100_000 {
            match step(&t) {
                Some(next) => t = next,
                None => return t,
            }
        }
        panic!("no normal form within the step limit")
    }
}

#[test]
fn beta_eta_normal_forms_match_independent_normalizer() {
    let p = suite::stdlib().unwrap();
    for which in 0..2 {
        let sig = terms::signature(which);
        let mut r = SplitMix64::stream(7, "lambda");
        for _ in 0..150 {
            let t = terms::typed_term(&mut r, &sig, &[], None);
            let text = t.to_value().to_string();
            let want = lambda::print(&lambda::normalize(&lambda::parse(&read(&text).unwrap())));
            assert_eq!(p.eval(&format!("(benf '{text})")).unwrap().to_string(), want, "{text}");
            let body = terms::typed_term(&mut r, &sig, &[terms::Ty::Base], None);
            let arg = terms::typed_term(&mut r, &sig, &[], Some(&terms::Ty::Base));
            let (b, a) = (body.to_value().to_string(), arg.to_value().to_string());
            let redex = format!("(app (lam i {b}) {a})");
            let want = lambda::print(&lambda::normalize(&lambda::parse(&read(&redex).unwrap())));
            assert_eq!(p.eval(&format!("(benf (beta '{b} '{a}))")).unwrap().to_string(), want, "{redex}");
        }
    }
}

fn eval_dense(p: &Datum, vars: &[i64]) -> i64 {
    match vars.split_first() {
        None => int(p),
        Some((&v, rest)) => items(p).iter().rev().fold(0, |acc, c| acc * v + eval_dense(c, rest)),
    }
}

fn eval_horner(h: &Datum, names: &[&str], vals: &[i64]) -> i64 {
    if let Datum::List(xs) = h {
        let v = names.iter().position(|n| *n == show(&xs[1])).unwrap();
        let pow = vals[v].pow(int(&xs[3]) as u32);
        eval_horner(&xs[2], names, vals) * pow + eval_horner(&xs[4], names, vals)
    } else {
        int(h)
    }
}

#[test]
fn horner_forms_denote_their_polynomials() {
    let p = suite::stdlib().unwrap();
    let names = ["x", "y", "z"];
    let mut r = SplitMix64::stream(3, "poly");
    for nvars in 1..=3 {
        for _ in 0..40 {
            let a = terms::dense_poly(&mut r, nvars);
            let b = terms::dense_poly(&mut r, nvars);
            let vars = format!("'({})", names[..nvars].join(" "));
            let h = p.eval(&format!("(to-horner {vars} '{a})")).unwrap().to_string();
            let sum = p.eval(&format!("(horner-add {vars} '{a} '{b})")).unwrap().to_string();
            let (a, b) = (read(&a.to_string()).unwrap(), read(&b.to_string()).unwrap());
            let (h, sum) = (read(&h).unwrap(), read(&sum).unwrap());
            for point in [[2, 3, 5], [-1, 4, 7], [0, 1, -2]] {
                let pt = &point[..nvars];
                assert_eq!(eval_horner(&h, &names, pt), eval_dense(&a, pt));
                assert_eq!(eval_horner(&sum, &names, pt), eval_dense(&a, pt) + eval_dense(&b, pt));
            }
        }
    }
}

mod rewrite {
    //! Innermost rewriting: arguments first, then the first matching rule
    //! at the root, repeated on the result.

    use super::{items, show, Datum};

    type Subst = Vec<(String, String)>;

    fn is_var(p: &Datum) -> Option<String> {
        match p {
            Datum::List(xs) if xs.len() == 2 && show(&xs[0]) == "?" => Some(show(&xs[1])),
            _ => None,
        }
    }

    fn matches(p: &Datum, t: &Datum, s: &mut Subst) -> bool {
        if let Some(v) = is_var(p) {
            let t = show(t);
            return match s.iter().find(|(k, _)| *k == v) {
                Some((_, bound)) => *bound == t,
                None => {
                    s.push((v, t));
                    true
                }
            };
        }
        match (p, t) {
            (Datum::List(ps), Datum::List(ts)) => {
                ps.len() == ts.len() && show(&ps[0]) == show(&ts[0]) && ps[1..].iter().zip(&ts[1..]).all(|(a, b)| matches(a, b, s))
            }
            (Datum::List(_), _) | (_, Datum::List(_)) => false,
            _ => show(p) == show(t),
        }
    }

    fn subst(p: &Datum, s: &Subst) -> String {
        if let Some(v) = is_var(p) {
            return s.iter().find(|(k, _)| *k == v).unwrap().1.clone();
        }
        match p {
            Datum::List(xs) => format!(
                "({} {})",
                show(&xs[0]),
                xs[1..].iter().map(|x| subst(x, s)).collect::<Vec<_>>().join(" ")
            ),
            _ => show(p),
        }
    }

    pub fn normalize(rules: &Datum, t: &Datum) -> String {
        let t = match t {
            Datum::List(xs) => format!(
                "({} {})",
                show(&xs[0]),
                xs[1..].iter().map(|x| normalize(rules, x)).collect::<Vec<_>>().join(" ")
            ),
            _ => show(t),
        };
        let td = super::read(&t).unwrap();
        for rule in items(rules) {
            let lr = items(rule);
            let mut s = Vec::new();
            if matches(&lr[0], &td, &mut s) {
                return normalize(rules, &super::read(&subst(&lr[1], &s)).unwrap());
            }
        }
        t
    }
}

#[test]
fn first_order_normal_forms_match_independent_rewriter() {
    let cfg = small_config(vec![Family::FirstOrder], 20);
    for task in suite::task_specs(&cfg).unwrap() {
        let p = suite::load_task(&task).unwrap();
        let rules = read(&p.lookup("task-rules").unwrap().to_string()).unwrap();
        for fn_arg in suite::episodes_of(&p, &task, cfg.step_budget).unwrap() {
            let arg = fn_arg.list_to_vec().unwrap()[1].to_string();
            let got = p.eval(&format!("(task-fn '{arg})")).unwrap().to_string();
            assert_eq!(got, rewrite::normalize(&rules, &read(&arg).unwrap()), "{} on {arg}", task.task_id);
        }
    }
}

#[test]
fn inverses_drive_their_choosers() {
    let p = suite::stdlib().unwrap();
    assert_eq!(p.eval("(invert-int 7)").unwrap().to_string(), "(#f #t 7 #f)");
    let chooser = p.parse_expr("(choose-int)").unwrap();
    for n in [-120, -3, 0, 7, 45, 908] {
        let labels = p.eval(&format!("(invert-int {n})")).unwrap().list_to_vec().unwrap();
        let indices: Vec<usize> = labels
            .iter()
            .map(|l| match l {
                Value::Bool(b) => *b as usize,
                Value::Int(d) => *d as usize,
                _ => panic!("unexpected label {l}"),
            })
            .collect();
        let out = replay(&chooser, p.env(), &indices, 1_000_000).unwrap();
        assert_eq!(out.value(), Some(&Value::Int(n)));
    }
}

#[test]
fn planted_tasks_have_one_good_leaf_per_tree() {
    let cfg = small_config(vec![Family::PlantedPath], 50);
    let tasks = suite::task_specs(&cfg).unwrap();
    assert_eq!(tasks.len(), 9);
    for task in tasks.iter().filter(|t| t.task_id.ends_with("depth4")) {
        let p = suite::load_task(task).unwrap();
        let pairs = suite::episodes_of(&p, task, cfg.step_budget).unwrap();
        assert_eq!(pairs.len(), 16, "{}", task.task_id);
        let walk = p.parse_expr("(walker arg)").unwrap();
        for fn_arg in pairs {
            let arg = fn_arg.list_to_vec().unwrap().remove(1);
            let env = p.env().extend(vec![dodona::Symbol::new("arg")], vec![arg]).unwrap();
            let en = enumerate(&walk, &env, usize::MAX, 10_000_000).unwrap();
            assert_eq!(en.results.len(), 1, "{}", task.task_id);
            assert_eq!(en.results[0].1.len(), 4);
        }
    }
}

#[test]
fn family_filter_and_empty_selection() {
    let suite = suite::gen_suite(&small_config(vec![Family::PlantedPath], 4)).unwrap();
    assert!(suite.tasks.iter().all(|t| t.family == Family::PlantedPath));
    assert!(suite.datapoints.iter().all(|d| d.task_id.starts_with("planted-path/")));
    assert!(suite::gen_suite(&small_config(vec![], 4)).is_err());
}

#[test]
fn verify_flags_exactly_one_corrupted_label() {
    let cfg = small_config(vec![Family::Identity, Family::Lists], 6);
    let s = suite::gen_suite(&cfg).unwrap();
    let report = suite::verify_suite(&s.tasks, &s.datapoints, cfg.step_budget, cfg.node_limit);
    assert!(report.passed(), "{:?}", report.failures);
    assert_eq!(report.tasks.values().map(|t| t.datapoints).sum::<usize>(), s.datapoints.len());
    let mut bad = s.datapoints.clone();
    let k = bad.iter().position(|d| d.num_choices == 10 && d.decision > 0).unwrap();
    bad[k].correct = (bad[k].correct + 1) % bad[k].num_choices;
    let report = suite::verify_suite(&s.tasks, &bad, cfg.step_budget, cfg.node_limit);
    assert_eq!(report.failures.len(), 1, "{:?}", report.failures);
    assert_eq!(report.failures[0].task_id, bad[k].task_id);
    assert_eq!(report.failures[0].episode, bad[k].episode);
}

#[test]
fn written_suite_reads_back_and_verifies() {
    let cfg = small_config(vec![Family::Identity, Family::PlantedPath, Family::Trees], 5);
    let s = suite::gen_suite(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    suite::write_suite(&s, dir.path()).unwrap();
    let back = suite::read_datapoints(dir.path()).unwrap();
    assert_eq!(back.len(), s.datapoints.len());
    for (a, b) in back.iter().zip(&s.datapoints) {
        assert_eq!(a.to_json_line(), b.to_json_line());
    }
    let m = suite::read_manifest(dir.path()).unwrap();
    assert_eq!(m.tasks.len(), s.tasks.len());
    for t in &m.tasks {
        let text = std::fs::read_to_string(dir.path().join(&t.source_file)).unwrap();
        assert_eq!(text, t.spec.source);
    }
    let tasks: Vec<_> = m.tasks.into_iter().map(|t| t.spec).collect();
    assert!(suite::verify_suite(&tasks, &back, cfg.step_budget, cfg.node_limit).passed());
    let split = [&m.split.train, &m.split.valid, &m.split.test];
    assert_eq!(split.iter().map(|p| p.len()).sum::<usize>(), tasks.len());
    for name in ["vocab.json", "edge_types.json", "tasks/stdlib.dd", "tasks/families.dd"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}
