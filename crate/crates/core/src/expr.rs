//! Core expression forms and the syntax-to-core analysis pass.

use std::fmt;
use std::sync::Arc;

use crate::reader::{ReadError, Syntax, SyntaxKind};
use crate::value::{Symbol, Value};

/// A core-grammar expression.
///
/// `Const` doubles as the splice point for already-evaluated values inside
/// continuation templates: a value in expression position evaluates to
/// itself. `Hole` marks the position a suspended segment is waiting on.
#[derive(Clone)]
pub enum Expr {
    Const(Value),
    Var(Symbol),
    Quote(Value),
    If(Arc<[Expr; 3]>),
    Lambda(Arc<Lambda>),
    Choose(Arc<Expr>),
    Define(Symbol, Arc<Expr>),
    App(Arc<[Expr]>),
    Hole,
}

pub struct Lambda {
    pub params: Vec<Symbol>,
    pub body: Expr,
    /// Symbols free in `body` other than `params`, in first-occurrence order.
    pub free: Vec<Symbol>,
}

impl Lambda {
    pub fn new(params: Vec<Symbol>, body: Expr) -> Lambda {
        let mut free = Vec::new();
        collect_free(&body, &mut params.clone(), &mut free);
        Lambda { params, body, free }
    }
}

impl Expr {
    pub fn app(items: Vec<Expr>) -> Expr {
        Expr::App(items.into())
    }

    pub fn is_value(&self) -> bool {
        matches!(self, Expr::Const(_))
    }

    /// Number of Holes anywhere in the expression.
    pub fn hole_count(&self) -> usize {
        match self {
            Expr::Hole => 1,
            Expr::Const(_) | Expr::Var(_) | Expr::Quote(_) => 0,
            Expr::If(parts) => parts.iter().map(Expr::hole_count).sum(),
            Expr::Lambda(l) => l.body.hole_count(),
            Expr::Choose(e) | Expr::Define(_, e) => e.hole_count(),
            Expr::App(items) => items.iter().map(Expr::hole_count).sum(),
        }
    }

    /// Replaces the top-level Hole of a segment template with `value`.
    pub fn fill_hole(&self, value: Value) -> Option<Expr> {
        let filled = Expr::Const(value);
        match self {
            Expr::Hole => Some(filled),
            Expr::If(parts) => {
                let mut parts = (**parts).clone();
                let slot = parts.iter_mut().find(|p| matches!(p, Expr::Hole))?;
                *slot = filled;
                Some(Expr::If(Arc::new(parts)))
            }
            Expr::Choose(arg) if matches!(**arg, Expr::Hole) => Some(Expr::Choose(Arc::new(filled))),
            Expr::Define(name, body) if matches!(**body, Expr::Hole) => {
                Some(Expr::Define(*name, Arc::new(filled)))
            }
            Expr::App(items) => {
                let mut items = items.to_vec();
                let slot = items.iter_mut().find(|p| matches!(p, Expr::Hole))?;
                *slot = filled;
                Some(Expr::App(items.into()))
            }
            _ => None,
        }
    }

    /// Free symbols in first-occurrence order.
    pub fn free_vars(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        collect_free(self, &mut Vec::new(), &mut out);
        out
    }
}

fn collect_free(e: &Expr, bound: &mut Vec<Symbol>, out: &mut Vec<Symbol>) {
    match e {
        Expr::Var(s) => {
            if !bound.contains(s) && !out.contains(s) {
                out.push(*s);
            }
        }
        Expr::Const(_) | Expr::Quote(_) | Expr::Hole => {}
        Expr::If(parts) => parts.iter().for_each(|p| collect_free(p, bound, out)),
        Expr::Lambda(l) => {
            let depth = bound.len();
            bound.extend(l.params.iter().copied());
            collect_free(&l.body, bound, out);
            bound.truncate(depth);
        }
        Expr::Choose(arg) => collect_free(arg, bound, out),
        Expr::Define(_, body) => collect_free(body, bound, out),
        Expr::App(items) => items.iter().for_each(|p| collect_free(p, bound, out)),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn seq(f: &mut fmt::Formatter<'_>, items: &[Expr]) -> fmt::Result {
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{item}")?;
            }
            Ok(())
        }
        match self {
            Expr::Const(v) => write!(f, "{v}"),
            Expr::Var(s) => write!(f, "{s}"),
            Expr::Quote(v) => write!(f, "'{v}"),
            Expr::If(parts) => {
                f.write_str("(if ")?;
                seq(f, &parts[..])?;
                f.write_str(")")
            }
            Expr::Lambda(l) => {
                f.write_str("(lambda (")?;
                for (i, p) in l.params.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ") {})", l.body)
            }
            Expr::Choose(arg) => write!(f, "(choose {arg})"),
            Expr::Define(name, body) => write!(f, "(define {name} {body})"),
            Expr::App(items) => {
                f.write_str("(")?;
                seq(f, items)?;
                f.write_str(")")
            }
            Expr::Hole => f.write_str("◦"),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn malformed(form: &'static str, reason: &str, syntax: &Syntax) -> ReadError {
    ReadError::Malformed {
        form,
        reason: reason.to_owned(),
        span: syntax.span,
    }
}

/// Converts quoted syntax into the value it denotes.
pub fn datum(syntax: &Syntax) -> Value {
    match &syntax.kind {
        SyntaxKind::Bool(b) => Value::Bool(*b),
        SyntaxKind::Int(i) => Value::Int(*i),
        SyntaxKind::Symbol(s) => Value::sym(s),
        SyntaxKind::List(items) => Value::list(items.iter().map(datum).collect::<Vec<_>>()),
    }
}

/// Converts sugar-free syntax into a core expression. `define` is accepted
/// only when `top_level` is set.
pub fn analyze(syntax: &Syntax, top_level: bool) -> Result<Expr, ReadError> {
    let items = match &syntax.kind {
        SyntaxKind::Bool(b) => return Ok(Expr::Const(Value::Bool(*b))),
        SyntaxKind::Int(i) => return Ok(Expr::Const(Value::Int(*i))),
        SyntaxKind::Symbol(s) => return Ok(Expr::Var(Symbol::new(s))),
        SyntaxKind::List(items) => items,
    };
    if items.is_empty() {
        return Err(malformed("application", "empty application", syntax));
    }
    let sub = |s: &Syntax| analyze(s, false);
    match syntax.head() {
        Some("quote") => match items.as_slice() {
            [_, d] => Ok(Expr::Quote(datum(d))),
            _ => Err(malformed("quote", "expected exactly one datum", syntax)),
        },
        Some("if") => match items.as_slice() {
            [_, c, t, e] => Ok(Expr::If(Arc::new([sub(c)?, sub(t)?, sub(e)?]))),
            _ => Err(malformed("if", "expected condition, then and else", syntax)),
        },
        Some("lambda") => match items.as_slice() {
            [_, params, body] => {
                let params = params
                    .as_list()
                    .ok_or_else(|| malformed("lambda", "parameters must be a list", params))?
                    .iter()
                    .map(|p| {
                        p.as_symbol()
                            .map(Symbol::new)
                            .ok_or_else(|| malformed("lambda", "parameter must be a symbol", p))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Expr::Lambda(Arc::new(Lambda::new(params, sub(body)?))))
            }
            _ => Err(malformed("lambda", "expected parameters and one body", syntax)),
        },
        Some("choose") => match items.as_slice() {
            [_, arg] => Ok(Expr::Choose(Arc::new(sub(arg)?))),
            _ => Err(malformed("choose", "expected exactly one argument", syntax)),
        },
        Some("define") => {
            if !top_level {
                return Err(malformed("define", "only allowed at top level", syntax));
            }
            match items.as_slice() {
                [_, name, body] => {
                    let name = name
                        .as_symbol()
                        .ok_or_else(|| malformed("define", "name must be a symbol", name))?;
                    Ok(Expr::Define(Symbol::new(name), Arc::new(sub(body)?)))
                }
                _ => Err(malformed("define", "expected a name and one body", syntax)),
            }
        }
        _ => Ok(Expr::App(items.iter().map(sub).collect::<Result<Vec<_>, _>>()?.into())),
    }
}
