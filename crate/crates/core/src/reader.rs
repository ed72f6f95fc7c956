//! S-expression reader: lexing, parsing and surface-sugar expansion.
//!
//! The reader works on [`Syntax`] trees, which keep a [`Span`] on every node
//! for error reporting. Core forms are produced from them by
//! [`crate::expr::analyze`].

use std::fmt;

use thiserror::Error;

/// Byte offsets `[start, end)` into the source text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Span {
        debug_assert!(start <= end);
        Span { start, end }
    }

    fn join(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    LParen,
    RParen,
    Quote,
    Bool(bool),
    Int(i64),
    Symbol(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::LParen => f.write_str("("),
            TokenKind::RParen => f.write_str(")"),
            TokenKind::Quote => f.write_str("'"),
            TokenKind::Bool(true) => f.write_str("#t"),
            TokenKind::Bool(false) => f.write_str("#f"),
            TokenKind::Int(i) => write!(f, "{i}"),
            TokenKind::Symbol(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReadError {
    #[error("illegal character {ch:?} at {span}")]
    IllegalChar { ch: char, span: Span },
    #[error("integer literal out of range at {span}")]
    IntOverflow { span: Span },
    #[error("unbalanced ')' at {span}")]
    UnexpectedClose { span: Span },
    #[error("unclosed '(' opened at {span}")]
    Unclosed { span: Span },
    #[error("quote with nothing to quote at {span}")]
    DanglingQuote { span: Span },
    #[error("malformed {form} at {span}: {reason}")]
    Malformed {
        form: &'static str,
        reason: String,
        span: Span,
    },
}

impl ReadError {
    pub fn span(&self) -> Span {
        match self {
            ReadError::IllegalChar { span, .. }
            | ReadError::IntOverflow { span }
            | ReadError::UnexpectedClose { span }
            | ReadError::Unclosed { span }
            | ReadError::DanglingQuote { span }
            | ReadError::Malformed { span, .. } => *span,
        }
    }
}

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | '\'' | ';')
}

fn is_symbol_char(c: char) -> bool {
    c.is_alphanumeric() || "+-*/<>=!?_.:%&^~$@".contains(c)
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, ReadError> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c == ';' {
            while let Some(&(_, c)) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
            }
            continue;
        }
        let single = match c {
            '(' => Some(TokenKind::LParen),
            ')' => Some(TokenKind::RParen),
            '\'' => Some(TokenKind::Quote),
            _ => None,
        };
        if let Some(kind) = single {
            chars.next();
            tokens.push(Token {
                kind,
                span: Span::new(start, start + 1),
            });
            continue;
        }
        let mut end = start;
        while let Some(&(i, c)) = chars.peek() {
            if is_delimiter(c) {
                break;
            }
            end = i + c.len_utf8();
            chars.next();
        }
        let span = Span::new(start, end);
        let word = &text[start..end];
        tokens.push(Token {
            kind: classify(word, span)?,
            span,
        });
    }
    Ok(tokens)
}

fn classify(word: &str, span: Span) -> Result<TokenKind, ReadError> {
    match word {
        "#t" => return Ok(TokenKind::Bool(true)),
        "#f" => return Ok(TokenKind::Bool(false)),
        _ => {}
    }
    let digits = word.strip_prefix('-').unwrap_or(word);
    if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
        return word
            .parse::<i64>()
            .map(TokenKind::Int)
            .map_err(|_| ReadError::IntOverflow { span });
    }
    if let Some((offset, ch)) = word.char_indices().find(|&(_, c)| !is_symbol_char(c)) {
        let at = span.start + offset;
        return Err(ReadError::IllegalChar {
            ch,
            span: Span::new(at, at + ch.len_utf8()),
        });
    }
    Ok(TokenKind::Symbol(word.to_owned()))
}

#[derive(Clone, Debug)]
pub enum SyntaxKind {
    Bool(bool),
    Int(i64),
    Symbol(String),
    List(Vec<Syntax>),
}

/// A parsed S-expression with its source span. Equality ignores spans.
#[derive(Clone, Debug)]
pub struct Syntax {
    pub kind: SyntaxKind,
    pub span: Span,
}

impl PartialEq for Syntax {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (SyntaxKind::Bool(a), SyntaxKind::Bool(b)) => a == b,
            (SyntaxKind::Int(a), SyntaxKind::Int(b)) => a == b,
            (SyntaxKind::Symbol(a), SyntaxKind::Symbol(b)) => a == b,
            (SyntaxKind::List(a), SyntaxKind::List(b)) => a == b,
            _ => false,
        }
    }
}

impl Syntax {
    pub fn new(kind: SyntaxKind, span: Span) -> Syntax {
        Syntax { kind, span }
    }

    pub fn symbol(name: &str, span: Span) -> Syntax {
        Syntax::new(SyntaxKind::Symbol(name.to_owned()), span)
    }

    pub fn list(items: Vec<Syntax>, span: Span) -> Syntax {
        Syntax::new(SyntaxKind::List(items), span)
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match &self.kind {
            SyntaxKind::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Syntax]> {
        match &self.kind {
            SyntaxKind::List(items) => Some(items),
            _ => None,
        }
    }

    /// The head symbol of a list form, if any.
    pub fn head(&self) -> Option<&str> {
        self.as_list()?.first()?.as_symbol()
    }
}

impl fmt::Display for Syntax {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SyntaxKind::Bool(true) => f.write_str("#t"),
            SyntaxKind::Bool(false) => f.write_str("#f"),
            SyntaxKind::Int(i) => write!(f, "{i}"),
            SyntaxKind::Symbol(s) => f.write_str(s),
            SyntaxKind::List(items) => {
                if items.len() == 2 && self.head() == Some("quote") {
                    return write!(f, "'{}", items[1]);
                }
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

pub fn parse(tokens: &[Token]) -> Result<Vec<Syntax>, ReadError> {
    let mut pos = 0;
    let mut out = Vec::new();
    while pos < tokens.len() {
        out.push(parse_one(tokens, &mut pos)?);
    }
    Ok(out)
}

/// Tokenizes and parses in one go.
pub fn read(text: &str) -> Result<Vec<Syntax>, ReadError> {
    parse(&tokenize(text)?)
}

// Iterative so that deeply nested input cannot overflow the host stack.
fn parse_one(tokens: &[Token], pos: &mut usize) -> Result<Syntax, ReadError> {
    enum Pending {
        List(Span, Vec<Syntax>),
        Quote(Span),
    }
    let mut stack: Vec<Pending> = Vec::new();
    loop {
        let token = match tokens.get(*pos) {
            Some(t) => t,
            None => {
                return Err(match stack.pop() {
                    Some(Pending::List(span, _)) => ReadError::Unclosed { span },
                    Some(Pending::Quote(span)) => ReadError::DanglingQuote { span },
                    None => unreachable!("parse_one called at end of input"),
                })
            }
        };
        *pos += 1;
        let mut done = match &token.kind {
            TokenKind::LParen => {
                stack.push(Pending::List(token.span, Vec::new()));
                continue;
            }
            TokenKind::Quote => {
                stack.push(Pending::Quote(token.span));
                continue;
            }
            TokenKind::RParen => match stack.pop() {
                Some(Pending::List(open, items)) => Syntax::list(items, open.join(token.span)),
                Some(Pending::Quote(span)) => return Err(ReadError::DanglingQuote { span }),
                None => return Err(ReadError::UnexpectedClose { span: token.span }),
            },
            TokenKind::Bool(b) => Syntax::new(SyntaxKind::Bool(*b), token.span),
            TokenKind::Int(i) => Syntax::new(SyntaxKind::Int(*i), token.span),
            TokenKind::Symbol(s) => Syntax::symbol(s, token.span),
        };
        loop {
            match stack.pop() {
                None => return Ok(done),
                Some(Pending::Quote(span)) => {
                    let full = span.join(done.span);
                    done = Syntax::list(vec![Syntax::symbol("quote", span), done], full);
                }
                Some(Pending::List(span, mut items)) => {
                    items.push(done);
                    stack.push(Pending::List(span, items));
                    break;
                }
            }
        }
    }
}

fn malformed(form: &'static str, reason: impl Into<String>, span: Span) -> ReadError {
    ReadError::Malformed {
        form,
        reason: reason.into(),
        span,
    }
}

/// Rewrites `let`, `let*` and `(define (f a ...) b)` into core forms,
/// recursively. Quoted data is left untouched.
pub fn expand_sugar(e: &Syntax) -> Result<Syntax, ReadError> {
    let items = match &e.kind {
        SyntaxKind::List(items) => items,
        _ => return Ok(e.clone()),
    };
    match e.head() {
        Some("quote") => Ok(e.clone()),
        Some("let") => expand_let(e, items),
        Some("let*") => expand_let_star(e, items),
        Some("define") => expand_define(e, items),
        _ => Ok(Syntax::list(
            items.iter().map(expand_sugar).collect::<Result<_, _>>()?,
            e.span,
        )),
    }
}

fn bindings<'a>(
    form: &'static str,
    e: &'a Syntax,
    items: &'a [Syntax],
) -> Result<(Vec<(&'a Syntax, &'a Syntax)>, &'a Syntax), ReadError> {
    if items.len() != 3 {
        return Err(malformed(form, "expected a binding list and one body", e.span));
    }
    let list = items[1]
        .as_list()
        .ok_or_else(|| malformed(form, "binding list must be a list", items[1].span))?;
    let mut out = Vec::with_capacity(list.len());
    for binding in list {
        match binding.as_list() {
            Some([name, value]) if name.as_symbol().is_some() => out.push((name, value)),
            Some([name, _]) => {
                return Err(malformed(form, "binder must be a symbol", name.span))
            }
            _ => return Err(malformed(form, "binding must be (name value)", binding.span)),
        }
    }
    Ok((out, &items[2]))
}

fn expand_let(e: &Syntax, items: &[Syntax]) -> Result<Syntax, ReadError> {
    let (binds, body) = bindings("let", e, items)?;
    let params = Syntax::list(binds.iter().map(|(n, _)| (*n).clone()).collect(), items[1].span);
    let lambda = Syntax::list(
        vec![
            Syntax::symbol("lambda", items[0].span),
            params,
            expand_sugar(body)?,
        ],
        e.span,
    );
    let mut app = vec![lambda];
    for (_, value) in binds {
        app.push(expand_sugar(value)?);
    }
    Ok(Syntax::list(app, e.span))
}

fn expand_let_star(e: &Syntax, items: &[Syntax]) -> Result<Syntax, ReadError> {
    let (binds, body) = bindings("let*", e, items)?;
    let mut acc = body.clone();
    for (name, value) in binds.into_iter().rev() {
        acc = Syntax::list(
            vec![
                Syntax::symbol("let", items[0].span),
                Syntax::list(
                    vec![Syntax::list(vec![name.clone(), value.clone()], name.span)],
                    name.span,
                ),
                acc,
            ],
            e.span,
        );
    }
    expand_sugar(&acc)
}

fn expand_define(e: &Syntax, items: &[Syntax]) -> Result<Syntax, ReadError> {
    if items.len() != 3 {
        return Err(malformed("define", "expected a name and one body", e.span));
    }
    match &items[1].kind {
        SyntaxKind::Symbol(_) => Ok(Syntax::list(
            vec![items[0].clone(), items[1].clone(), expand_sugar(&items[2])?],
            e.span,
        )),
        SyntaxKind::List(signature) => {
            let (name, params) = signature
                .split_first()
                .ok_or_else(|| malformed("define", "empty function signature", items[1].span))?;
            if name.as_symbol().is_none() {
                return Err(malformed("define", "function name must be a symbol", name.span));
            }
            if let Some(bad) = params.iter().find(|p| p.as_symbol().is_none()) {
                return Err(malformed("define", "parameter must be a symbol", bad.span));
            }
            let lambda = Syntax::list(
                vec![
                    Syntax::symbol("lambda", items[0].span),
                    Syntax::list(params.to_vec(), items[1].span),
                    expand_sugar(&items[2])?,
                ],
                e.span,
            );
            Ok(Syntax::list(vec![items[0].clone(), name.clone(), lambda], e.span))
        }
        _ => Err(malformed("define", "expected a symbol or signature", items[1].span)),
    }
}
