//! Runtime values and lexical environments.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, LazyLock, RwLock};

use crate::expr::Lambda;
use crate::interp::EvalError;
use crate::primitives::Primitive;

/// An interned, case-sensitive symbol name.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Symbol(u32);

struct Interner {
    names: Vec<&'static str>,
    ids: HashMap<&'static str, u32>,
}

static INTERNER: LazyLock<RwLock<Interner>> = LazyLock::new(|| {
    RwLock::new(Interner {
        names: Vec::new(),
        ids: HashMap::new(),
    })
});

impl Symbol {
    pub fn new(name: &str) -> Symbol {
        if let Some(&id) = INTERNER.read().unwrap().ids.get(name) {
            return Symbol(id);
        }
        let mut interner = INTERNER.write().unwrap();
        if let Some(&id) = interner.ids.get(name) {
            return Symbol(id);
        }
        let leaked: &'static str = Box::leak(name.to_owned().into_boxed_str());
        let id = interner.names.len() as u32;
        interner.names.push(leaked);
        interner.ids.insert(leaked, id);
        Symbol(id)
    }

    pub fn as_str(self) -> &'static str {
        INTERNER.read().unwrap().names[self.0 as usize]
    }
}

// Ordered by name so that canonical orders do not depend on interning order.
impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.0 == other.0 {
            Ordering::Equal
        } else {
            self.as_str().cmp(other.as_str())
        }
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "'{}", self.as_str())
    }
}

/// A closure: a lambda form paired with the environment it was created in.
pub struct Closure {
    pub lambda: Arc<Lambda>,
    pub env: Env,
}

#[derive(Clone)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Symbol(Symbol),
    Nil,
    Pair(Arc<(Value, Value)>),
    Closure(Arc<Closure>),
    Primitive(&'static Primitive),
    /// Elements kept sorted by [`Value::canonical_cmp`] and deduplicated.
    Set(Arc<[Value]>),
    /// Entries kept sorted by key, keys unique.
    Map(Arc<[(Value, Value)]>),
}

impl Value {
    pub fn sym(name: &str) -> Value {
        Value::Symbol(Symbol::new(name))
    }

    pub fn cons(head: Value, tail: Value) -> Value {
        Value::Pair(Arc::new((head, tail)))
    }

    pub fn list<I>(items: I) -> Value
    where
        I: IntoIterator<Item = Value>,
        I::IntoIter: DoubleEndedIterator,
    {
        items
            .into_iter()
            .rev()
            .fold(Value::Nil, |tail, head| Value::cons(head, tail))
    }

    pub fn set_of(items: impl IntoIterator<Item = Value>) -> Value {
        let mut items: Vec<Value> = items.into_iter().collect();
        items.sort_by(Value::canonical_cmp);
        items.dedup_by(|a, b| a.canonical_cmp(b) == Ordering::Equal);
        Value::Set(items.into())
    }

    /// Later bindings of an equal key replace earlier ones.
    pub fn map_of(entries: impl IntoIterator<Item = (Value, Value)>) -> Value {
        let mut out: Vec<(Value, Value)> = Vec::new();
        for (k, v) in entries {
            match out.binary_search_by(|(probe, _)| probe.canonical_cmp(&k)) {
                Ok(i) => out[i].1 = v,
                Err(i) => out.insert(i, (k, v)),
            }
        }
        Value::Map(out.into())
    }

    pub fn is_truthy(&self) -> bool {
        !matches!(self, Value::Bool(false))
    }

    /// Collects a proper list into a vector; `None` for anything else.
    pub fn list_to_vec(&self) -> Option<Vec<Value>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Value::Nil => return Some(out),
                Value::Pair(cell) => {
                    out.push(cell.0.clone());
                    cur = &cell.1;
                }
                _ => return None,
            }
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Bool(_) => "bool",
            Value::Int(_) => "int",
            Value::Symbol(_) => "symbol",
            Value::Nil => "empty list",
            Value::Pair(_) => "pair",
            Value::Closure(_) => "closure",
            Value::Primitive(_) => "primitive",
            Value::Set(_) => "set",
            Value::Map(_) => "map",
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Bool(_) => 0,
            Value::Int(_) => 1,
            Value::Symbol(_) => 2,
            Value::Nil => 3,
            Value::Pair(_) => 4,
            Value::Set(_) => 5,
            Value::Map(_) => 6,
            Value::Primitive(_) => 7,
            Value::Closure(_) => 8,
        }
    }

    /// Total order used for canonical set/map layout and printing.
    ///
    /// Structural on the closure-free fragment; closures compare by address,
    /// so containers of closures have no stable print order across runs.
    pub fn canonical_cmp(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Bool(a), Value::Bool(b)) => a.cmp(b),
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Symbol(a), Value::Symbol(b)) => a.cmp(b),
            (Value::Nil, Value::Nil) => Ordering::Equal,
            (Value::Pair(a), Value::Pair(b)) => {
                if Arc::ptr_eq(a, b) {
                    return Ordering::Equal;
                }
                a.0.canonical_cmp(&b.0).then_with(|| a.1.canonical_cmp(&b.1))
            }
            (Value::Set(a), Value::Set(b)) => cmp_seq(a.iter(), b.iter(), Value::canonical_cmp),
            (Value::Map(a), Value::Map(b)) => cmp_seq(a.iter(), b.iter(), |x, y| {
                x.0.canonical_cmp(&y.0).then_with(|| x.1.canonical_cmp(&y.1))
            }),
            (Value::Primitive(a), Value::Primitive(b)) => a.name.cmp(b.name),
            (Value::Closure(a), Value::Closure(b)) => {
                (Arc::as_ptr(a) as usize).cmp(&(Arc::as_ptr(b) as usize))
            }
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

fn cmp_seq<'a, T: 'a>(
    a: impl Iterator<Item = &'a T>,
    mut b: impl Iterator<Item = &'a T>,
    cmp: impl Fn(&T, &T) -> Ordering,
) -> Ordering {
    for x in a {
        match b.next() {
            None => return Ordering::Greater,
            Some(y) => match cmp(x, y) {
                Ordering::Equal => {}
                other => return other,
            },
        }
    }
    if b.next().is_some() {
        Ordering::Less
    } else {
        Ordering::Equal
    }
}

/// Structural equality; closures and primitives compare by identity.
pub fn values_equal(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Bool(x), Value::Bool(y)) => x == y,
        (Value::Int(x), Value::Int(y)) => x == y,
        (Value::Symbol(x), Value::Symbol(y)) => x == y,
        (Value::Nil, Value::Nil) => true,
        (Value::Pair(x), Value::Pair(y)) => {
            Arc::ptr_eq(x, y) || (values_equal(&x.0, &y.0) && values_equal(&x.1, &y.1))
        }
        (Value::Closure(x), Value::Closure(y)) => Arc::ptr_eq(x, y),
        (Value::Primitive(x), Value::Primitive(y)) => std::ptr::eq(*x, *y),
        (Value::Set(x), Value::Set(y)) => {
            x.len() == y.len() && x.iter().zip(y.iter()).all(|(p, q)| values_equal(p, q))
        }
        (Value::Map(x), Value::Map(y)) => {
            x.len() == y.len()
                && x.iter()
                    .zip(y.iter())
                    .all(|(p, q)| values_equal(&p.0, &q.0) && values_equal(&p.1, &q.1))
        }
        _ => false,
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        values_equal(self, other)
    }
}

impl Eq for Value {}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Value::Bool(b) => b.hash(state),
            Value::Int(i) => i.hash(state),
            Value::Symbol(s) => s.hash(state),
            Value::Nil => {}
            Value::Pair(cell) => {
                cell.0.hash(state);
                cell.1.hash(state);
            }
            Value::Closure(c) => (Arc::as_ptr(c) as usize).hash(state),
            Value::Primitive(p) => p.name.hash(state),
            Value::Set(items) => items.iter().for_each(|v| v.hash(state)),
            Value::Map(entries) => entries.iter().for_each(|(k, v)| {
                k.hash(state);
                v.hash(state);
            }),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(true) => f.write_str("#t"),
            Value::Bool(false) => f.write_str("#f"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Symbol(s) => write!(f, "{s}"),
            Value::Nil => f.write_str("()"),
            Value::Pair(_) => {
                f.write_str("(")?;
                let mut cur = self;
                let mut first = true;
                loop {
                    match cur {
                        Value::Pair(cell) => {
                            if !first {
                                f.write_str(" ")?;
                            }
                            write!(f, "{}", cell.0)?;
                            first = false;
                            cur = &cell.1;
                        }
                        Value::Nil => break,
                        other => {
                            write!(f, " . {other}")?;
                            break;
                        }
                    }
                }
                f.write_str(")")
            }
            Value::Closure(c) => {
                f.write_str("<closure (")?;
                for (i, p) in c.lambda.params.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str(")>")
            }
            Value::Primitive(p) => write!(f, "<prim:{}>", p.name),
            Value::Set(items) => {
                f.write_str("#set(")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
            Value::Map(entries) => {
                f.write_str("#map(")?;
                for (i, (k, v)) in entries.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "({k} {v})")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

enum Frame {
    Global(RwLock<HashMap<Symbol, Value>>),
    Local {
        names: Vec<Symbol>,
        values: Vec<Value>,
        parent: Env,
    },
}

/// A chain of binding frames. Only the root (global) frame accepts new
/// bindings after construction.
#[derive(Clone)]
pub struct Env(Arc<Frame>);

impl Env {
    pub fn new_global() -> Env {
        Env(Arc::new(Frame::Global(RwLock::new(HashMap::new()))))
    }

    pub fn lookup(&self, name: Symbol) -> Result<Value, EvalError> {
        self.try_lookup(name).ok_or(EvalError::Unbound(name))
    }

    pub fn try_lookup(&self, name: Symbol) -> Option<Value> {
        let mut env = self;
        loop {
            match &*env.0 {
                Frame::Local {
                    names,
                    values,
                    parent,
                } => {
                    if let Some(i) = names.iter().rposition(|n| *n == name) {
                        return Some(values[i].clone());
                    }
                    env = parent;
                }
                Frame::Global(table) => return table.read().unwrap().get(&name).cloned(),
            }
        }
    }

    pub fn extend(&self, names: Vec<Symbol>, values: Vec<Value>) -> Result<Env, EvalError> {
        if names.len() != values.len() {
            return Err(EvalError::Arity {
                name: "lambda".into(),
                expected: names.len().to_string(),
                got: values.len(),
            });
        }
        Ok(Env(Arc::new(Frame::Local {
            names,
            values,
            parent: self.clone(),
        })))
    }

    /// Binds `name` in the global frame reachable from this environment.
    pub fn define(&self, name: Symbol, value: Value) {
        self.global_table()
            .write()
            .unwrap()
            .insert(name, value);
    }

    pub fn is_global(&self) -> bool {
        matches!(&*self.0, Frame::Global(_))
    }

    pub fn global(&self) -> Env {
        let mut env = self;
        loop {
            match &*env.0 {
                Frame::Local { parent, .. } => env = parent,
                Frame::Global(_) => return env.clone(),
            }
        }
    }

    fn global_table(&self) -> &RwLock<HashMap<Symbol, Value>> {
        let mut env = self;
        loop {
            match &*env.0 {
                Frame::Local { parent, .. } => env = parent,
                Frame::Global(table) => return table,
            }
        }
    }

    /// Drops every global binding. Breaks the reference cycles formed by
    /// globally defined closures that capture the global frame.
    pub fn clear_globals(&self) {
        self.global_table().write().unwrap().clear();
    }

    pub fn ptr_eq(&self, other: &Env) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl fmt::Debug for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Frame::Global(_) => f.write_str("<global>"),
            Frame::Local {
                names,
                values,
                parent,
            } => {
                f.write_str("{")?;
                for (i, (n, v)) in names.iter().zip(values).enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{n}:{v}")?;
                }
                write!(f, "}} -> {parent:?}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(xs: &[i64]) -> Value {
        Value::list(xs.iter().map(|&i| Value::Int(i)).collect::<Vec<_>>())
    }

    #[test]
    fn shadowed_lookup_returns_innermost() {
        let global = Env::new_global();
        let x = Symbol::new("x");
        let outer = global.extend(vec![x], vec![Value::Int(0)]).unwrap();
        let inner = outer.extend(vec![x], vec![Value::Int(2)]).unwrap();
        assert_eq!(inner.lookup(x).unwrap(), Value::Int(2));
        assert_eq!(outer.lookup(x).unwrap(), Value::Int(0));
    }

    #[test]
    fn global_lookup_and_unbound() {
        let global = Env::new_global();
        global.define(Symbol::new("y"), Value::Int(7));
        assert_eq!(global.lookup(Symbol::new("y")).unwrap(), Value::Int(7));
        match global.lookup(Symbol::new("z")) {
            Err(EvalError::Unbound(s)) => assert_eq!(s.as_str(), "z"),
            other => panic!("expected unbound error, got {other:?}"),
        }
    }

    #[test]
    fn extend_checks_arity_and_empty_frame_is_transparent() {
        let global = Env::new_global();
        global.define(Symbol::new("y"), Value::Int(7));
        assert!(global
            .extend(vec![Symbol::new("a")], vec![])
            .is_err());
        let child = global.extend(vec![], vec![]).unwrap();
        assert_eq!(child.lookup(Symbol::new("y")).unwrap(), Value::Int(7));
        let x = child.extend(vec![Symbol::new("x")], vec![Value::Int(0)]).unwrap();
        assert_eq!(x.lookup(Symbol::new("x")).unwrap(), Value::Int(0));
        assert!(child.try_lookup(Symbol::new("x")).is_none());
    }

    #[test]
    fn equality_basics() {
        assert_eq!(ints(&[0, 1]), ints(&[0, 1]));
        assert_ne!(Value::Bool(true), Value::Int(1));
        assert_ne!(ints(&[0, 1]), ints(&[0, 1, 2]));
    }

    #[test]
    fn sets_equal_under_every_insertion_order() {
        let elems = [Value::Int(1), Value::Int(2), ints(&[3])];
        let orders = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let sets: Vec<Value> = orders
            .iter()
            .map(|o| Value::set_of(o.iter().map(|&i| elems[i].clone())))
            .collect();
        for a in &sets {
            for b in &sets {
                assert!(values_equal(a, b));
            }
        }
        assert_eq!(sets[0].to_string(), "#set(1 2 (3))");
    }

    #[test]
    fn map_later_binding_wins() {
        let m = Value::map_of(vec![
            (Value::sym("a"), Value::Int(1)),
            (Value::sym("a"), Value::Int(2)),
        ]);
        assert_eq!(m.to_string(), "#map((a 2))");
    }

    #[test]
    fn improper_lists_print_dotted() {
        let v = Value::cons(Value::Bool(false), Value::Bool(true));
        assert_eq!(v.to_string(), "(#f . #t)");
    }
}
