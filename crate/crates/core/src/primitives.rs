//! Host-implemented primitive procedures bound in the global environment.

use crate::expr::Expr;
use crate::interp::EvalError;
use crate::value::{values_equal, Env, Symbol, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arity {
    Exact(usize),
    AtLeast(usize),
}

impl Arity {
    fn accepts(self, n: usize) -> bool {
        match self {
            Arity::Exact(k) => n == k,
            Arity::AtLeast(k) => n >= k,
        }
    }
}

impl std::fmt::Display for Arity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Arity::Exact(k) => write!(f, "{k}"),
            Arity::AtLeast(k) => write!(f, "at least {k}"),
        }
    }
}

pub type PureFn = fn(&[Value]) -> Result<Value, EvalError>;
pub type ExpandFn = fn(&[Value]) -> Result<Expr, EvalError>;

pub enum PrimKind {
    /// Computes its result directly.
    Pure(PureFn),
    /// Rewrites the application into an expression the interpreter keeps
    /// stepping, so that calls back into user closures stay suspendable.
    Expand(ExpandFn),
}

pub struct Primitive {
    pub name: &'static str,
    pub arity: Arity,
    pub kind: PrimKind,
}

impl Primitive {
    pub fn check_arity(&self, got: usize) -> Result<(), EvalError> {
        if self.arity.accepts(got) {
            Ok(())
        } else {
            Err(EvalError::Arity {
                name: self.name.to_owned(),
                expected: self.arity.to_string(),
                got,
            })
        }
    }
}

impl std::fmt::Debug for Primitive {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "<prim:{}>", self.name)
    }
}

fn int(prim: &'static str, v: &Value) -> Result<i64, EvalError> {
    match v {
        Value::Int(i) => Ok(*i),
        other => Err(EvalError::type_error(prim, "int", other)),
    }
}

fn boolean(prim: &'static str, v: &Value) -> Result<bool, EvalError> {
    match v {
        Value::Bool(b) => Ok(*b),
        other => Err(EvalError::type_error(prim, "bool", other)),
    }
}

fn proper_list(prim: &'static str, v: &Value) -> Result<Vec<Value>, EvalError> {
    v.list_to_vec()
        .ok_or_else(|| EvalError::type_error(prim, "list", v))
}

fn pair<'a>(prim: &'static str, v: &'a Value) -> Result<&'a (Value, Value), EvalError> {
    match v {
        Value::Pair(cell) => Ok(cell),
        other => Err(EvalError::type_error(prim, "pair", other)),
    }
}

fn fold_ints(
    prim: &'static str,
    args: &[Value],
    op: fn(i64, i64) -> Option<i64>,
) -> Result<Value, EvalError> {
    let mut acc = int(prim, &args[0])?;
    for a in &args[1..] {
        acc = op(acc, int(prim, a)?).ok_or(EvalError::Overflow(prim))?;
    }
    Ok(Value::Int(acc))
}

fn add(args: &[Value]) -> Result<Value, EvalError> {
    if args.is_empty() {
        return Ok(Value::Int(0));
    }
    fold_ints("+", args, i64::checked_add)
}

fn sub(args: &[Value]) -> Result<Value, EvalError> {
    if args.len() == 1 {
        return int("-", &args[0])?
            .checked_neg()
            .map(Value::Int)
            .ok_or(EvalError::Overflow("-"));
    }
    fold_ints("-", args, i64::checked_sub)
}

fn mul(args: &[Value]) -> Result<Value, EvalError> {
    if args.is_empty() {
        return Ok(Value::Int(1));
    }
    fold_ints("*", args, i64::checked_mul)
}

fn div(args: &[Value]) -> Result<Value, EvalError> {
    let (a, b) = (int("/", &args[0])?, int("/", &args[1])?);
    if b == 0 {
        return Err(EvalError::DivideByZero("/"));
    }
    a.checked_div(b).map(Value::Int).ok_or(EvalError::Overflow("/"))
}

fn remainder(args: &[Value]) -> Result<Value, EvalError> {
    let (a, b) = (int("remainder", &args[0])?, int("remainder", &args[1])?);
    if b == 0 {
        return Err(EvalError::DivideByZero("remainder"));
    }
    a.checked_rem(b)
        .map(Value::Int)
        .ok_or(EvalError::Overflow("remainder"))
}

fn max(args: &[Value]) -> Result<Value, EvalError> {
    fold_ints("max", args, |a, b| Some(a.max(b)))
}

fn min(args: &[Value]) -> Result<Value, EvalError> {
    fold_ints("min", args, |a, b| Some(a.min(b)))
}

fn equal(args: &[Value]) -> Result<Value, EvalError> {
    Ok(Value::Bool(args.windows(2).all(|w| values_equal(&w[0], &w[1]))))
}

fn compare(prim: &'static str, args: &[Value], ok: fn(i64, i64) -> bool) -> Result<Value, EvalError> {
    let ints = args.iter().map(|a| int(prim, a)).collect::<Result<Vec<_>, _>>()?;
    Ok(Value::Bool(ints.windows(2).all(|w| ok(w[0], w[1]))))
}

fn lt(args: &[Value]) -> Result<Value, EvalError> {
    compare("<", args, |a, b| a < b)
}

fn gt(args: &[Value]) -> Result<Value, EvalError> {
    compare(">", args, |a, b| a > b)
}

fn le(args: &[Value]) -> Result<Value, EvalError> {
    compare("<=", args, |a, b| a <= b)
}

fn ge(args: &[Value]) -> Result<Value, EvalError> {
    compare(">=", args, |a, b| a >= b)
}

fn cons(args: &[Value]) -> Result<Value, EvalError> {
    Ok(Value::cons(args[0].clone(), args[1].clone()))
}

fn first(args: &[Value]) -> Result<Value, EvalError> {
    Ok(pair("first", &args[0])?.0.clone())
}

fn rest(args: &[Value]) -> Result<Value, EvalError> {
    Ok(pair("rest", &args[0])?.1.clone())
}

fn second(args: &[Value]) -> Result<Value, EvalError> {
    let tail = &pair("second", &args[0])?.1;
    Ok(pair("second", tail)?.0.clone())
}

fn nth(args: &[Value]) -> Result<Value, EvalError> {
    let index = int("nth", &args[0])?;
    let items = proper_list("nth", &args[1])?;
    usize::try_from(index)
        .ok()
        .and_then(|i| items.get(i).cloned())
        .ok_or(EvalError::IndexOutOfRange {
            index,
            len: items.len(),
        })
}

fn is_null(args: &[Value]) -> Result<Value, EvalError> {
    Ok(Value::Bool(matches!(args[0], Value::Nil)))
}

fn is_pair(args: &[Value]) -> Result<Value, EvalError> {
    Ok(Value::Bool(matches!(args[0], Value::Pair(_))))
}

fn is_bool(args: &[Value]) -> Result<Value, EvalError> {
    Ok(Value::Bool(matches!(args[0], Value::Bool(_))))
}

fn is_int(args: &[Value]) -> Result<Value, EvalError> {
    Ok(Value::Bool(matches!(args[0], Value::Int(_))))
}

fn is_symbol(args: &[Value]) -> Result<Value, EvalError> {
    Ok(Value::Bool(matches!(args[0], Value::Symbol(_))))
}

fn list(args: &[Value]) -> Result<Value, EvalError> {
    Ok(Value::list(args.to_vec()))
}

fn not(args: &[Value]) -> Result<Value, EvalError> {
    Ok(Value::Bool(!boolean("not", &args[0])?))
}

fn and(args: &[Value]) -> Result<Value, EvalError> {
    let mut acc = true;
    for a in args {
        acc &= boolean("and", a)?;
    }
    Ok(Value::Bool(acc))
}

fn or(args: &[Value]) -> Result<Value, EvalError> {
    let mut acc = false;
    for a in args {
        acc |= boolean("or", a)?;
    }
    Ok(Value::Bool(acc))
}

fn length(args: &[Value]) -> Result<Value, EvalError> {
    Ok(Value::Int(proper_list("length", &args[0])?.len() as i64))
}

fn append(args: &[Value]) -> Result<Value, EvalError> {
    let Some((last, init)) = args.split_last() else {
        return Ok(Value::Nil);
    };
    let mut items = Vec::new();
    for a in init {
        items.extend(proper_list("append", a)?);
    }
    Ok(items
        .into_iter()
        .rev()
        .fold(last.clone(), |tail, head| Value::cons(head, tail)))
}

fn set_of(args: &[Value]) -> Result<Value, EvalError> {
    Ok(Value::set_of(args.iter().cloned()))
}

fn map_of(args: &[Value]) -> Result<Value, EvalError> {
    if args.len() % 2 != 0 {
        return Err(EvalError::Arity {
            name: "map-of".into(),
            expected: "an even number".into(),
            got: args.len(),
        });
    }
    Ok(Value::map_of(
        args.chunks(2).map(|kv| (kv[0].clone(), kv[1].clone())),
    ))
}

fn set_member(args: &[Value]) -> Result<Value, EvalError> {
    match &args[1] {
        Value::Set(items) => Ok(Value::Bool(items.iter().any(|v| values_equal(v, &args[0])))),
        other => Err(EvalError::type_error("set-member?", "set", other)),
    }
}

fn size(args: &[Value]) -> Result<Value, EvalError> {
    match &args[0] {
        Value::Set(items) => Ok(Value::Int(items.len() as i64)),
        Value::Map(entries) => Ok(Value::Int(entries.len() as i64)),
        other => Err(EvalError::type_error("size", "set or map", other)),
    }
}

fn map_get(args: &[Value]) -> Result<Value, EvalError> {
    match &args[0] {
        Value::Map(entries) => Ok(entries
            .iter()
            .find(|(k, _)| values_equal(k, &args[1]))
            .map(|(_, v)| v.clone())
            .unwrap_or(Value::Bool(false))),
        other => Err(EvalError::type_error("map-get", "map", other)),
    }
}

/// `(replicate n thunk)` becomes `(cons (thunk) (replicate n-1 thunk))`,
/// evaluated left to right, bottoming out at `'()`.
fn replicate(args: &[Value]) -> Result<Expr, EvalError> {
    let n = int("replicate", &args[0])?;
    if n < 0 {
        return Err(EvalError::type_error("replicate", "non-negative int", &args[0]));
    }
    if !matches!(args[1], Value::Closure(_) | Value::Primitive(_)) {
        return Err(EvalError::type_error("replicate", "procedure", &args[1]));
    }
    if n == 0 {
        return Ok(Expr::Const(Value::Nil));
    }
    let thunk = Expr::Const(args[1].clone());
    Ok(Expr::app(vec![
        Expr::Const(Value::Primitive(lookup("cons").unwrap())),
        Expr::app(vec![thunk.clone()]),
        Expr::app(vec![
            Expr::Const(Value::Primitive(lookup("replicate").unwrap())),
            Expr::Const(Value::Int(n - 1)),
            thunk,
        ]),
    ]))
}

macro_rules! prims {
    ($($name:literal => $arity:expr, $kind:ident($f:path);)*) => {
        pub static PRIMITIVES: &[Primitive] = &[
            $(Primitive { name: $name, arity: $arity, kind: PrimKind::$kind($f) },)*
        ];
    };
}

use Arity::{AtLeast, Exact};

prims! {
    "+" => AtLeast(0), Pure(add);
    "-" => AtLeast(1), Pure(sub);
    "*" => AtLeast(0), Pure(mul);
    "/" => Exact(2), Pure(div);
    "remainder" => Exact(2), Pure(remainder);
    "max" => AtLeast(1), Pure(max);
    "min" => AtLeast(1), Pure(min);
    "=" => AtLeast(1), Pure(equal);
    "<" => AtLeast(1), Pure(lt);
    ">" => AtLeast(1), Pure(gt);
    "<=" => AtLeast(1), Pure(le);
    ">=" => AtLeast(1), Pure(ge);
    "cons" => Exact(2), Pure(cons);
    "first" => Exact(1), Pure(first);
    "second" => Exact(1), Pure(second);
    "rest" => Exact(1), Pure(rest);
    "nth" => Exact(2), Pure(nth);
    "null?" => Exact(1), Pure(is_null);
    "pair?" => Exact(1), Pure(is_pair);
    "bool?" => Exact(1), Pure(is_bool);
    "int?" => Exact(1), Pure(is_int);
    "symbol?" => Exact(1), Pure(is_symbol);
    "list" => AtLeast(0), Pure(list);
    "replicate" => Exact(2), Expand(replicate);
    "not" => Exact(1), Pure(not);
    "and" => AtLeast(0), Pure(and);
    "or" => AtLeast(0), Pure(or);
    "length" => Exact(1), Pure(length);
    "append" => AtLeast(0), Pure(append);
    "set-of" => AtLeast(0), Pure(set_of);
    "map-of" => AtLeast(0), Pure(map_of);
    "set-member?" => Exact(2), Pure(set_member);
    "size" => Exact(1), Pure(size);
    "map-get" => Exact(2), Pure(map_get);
}

pub fn lookup(name: &str) -> Option<&'static Primitive> {
    PRIMITIVES.iter().find(|p| p.name == name)
}

/// Binds every primitive in the global frame of `env`.
pub fn install(env: &Env) {
    for p in PRIMITIVES {
        env.define(Symbol::new(p.name), Value::Primitive(p));
    }
}
