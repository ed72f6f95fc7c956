//! Graph encoding of choicepoints for oracles.
//!
//! Every node carries one token from a finite vocabulary (plus symbol
//! names). Values are embedded once per graph: closure-free values are
//! memoized structurally and closures by identity. Only bindings that a
//! template or closure body references are embedded.

use std::collections::HashMap;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::expr::Expr;
use crate::interp::Choicepoint;
use crate::value::{Env, Symbol, Value};

pub const GRAPH_FORMAT_VERSION: u32 = 1;
pub const EDGE_VOCAB_VERSION: u32 = 1;
pub const TOKEN_VOCAB_VERSION: u32 = 1;
pub const DEFAULT_NODE_LIMIT: usize = 20_000;

/// Structural tokens. Literal tokens (`#t`, `#f`, digits), symbol names and
/// `<prim:NAME>` tokens complete the vocabulary.
pub const RESERVED_TOKENS: &[&str] = &[
    "CHOICE", "FN-SUMMARY", "APP", "IF", "LAMBDA", "CONS", "NIL", "SET", "MAP", "PAIR-ENTRY", "HOLE",
    "INT", "INT-SIGN", "EVALUATED", "PENDING", "QUOTE", "CHOOSE", "DEFINE",
];

pub const LITERAL_TOKENS: &[&str] = &["#f", "#t", "0", "1", "2", "3", "4", "5", "6", "7", "8", "9"];

macro_rules! edge_types {
    ($($variant:ident => $name:literal),* $(,)?) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
        pub enum EdgeType { $($variant),* }

        impl EdgeType {
            pub const ALL: &'static [EdgeType] = &[$(EdgeType::$variant),*];

            pub fn name(self) -> &'static str {
                match self { $(EdgeType::$variant => $name),* }
            }

            pub fn from_name(name: &str) -> Option<EdgeType> {
                match name { $($name => Some(EdgeType::$variant),)* _ => None }
            }
        }
    };
}

edge_types! {
    AppFn => "APP-FN",
    AppArg => "APP-ARG",
    ArgNext => "ARG-NEXT",
    IfCond => "IF-COND",
    IfThen => "IF-THEN",
    IfElse => "IF-ELSE",
    LambdaParam => "LAMBDA-PARAM",
    LambdaBody => "LAMBDA-BODY",
    ClosureEnv => "CLOSURE-ENV",
    ConsHead => "CONS-HEAD",
    ConsTail => "CONS-TAIL",
    SetElem => "SET-ELEM",
    MapKey => "MAP-KEY",
    MapVal => "MAP-VAL",
    MapEntry => "MAP-ENTRY",
    SymbolBinding => "SYMBOL-BINDING",
    ChoiceOption => "CHOICE-OPTION",
    SegmentResult => "SEGMENT-RESULT",
    ValueSummary => "VALUE-SUMMARY",
    Quoted => "QUOTED",
    ChooseArg => "CHOOSE-ARG",
    DefineName => "DEFINE-NAME",
    DefineBody => "DEFINE-BODY",
}

impl fmt::Display for EdgeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for EdgeType {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for EdgeType {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<EdgeType, D::Error> {
        let name = String::deserialize(d)?;
        EdgeType::from_name(&name).ok_or_else(|| D::Error::custom(format!("unknown edge type {name}")))
    }
}

pub type NodeId = u32;
pub type Edge = (NodeId, NodeId, EdgeType);

/// A choicepoint as a token-labelled, edge-typed directed graph.
///
/// Edges are kept sorted by (source, destination, type name) and
/// deduplicated, so serialization is deterministic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiceGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<Edge>,
    pub choices: Vec<NodeId>,
    pub root: NodeId,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph exceeds the node limit of {0}")]
    Oversize(usize),
    #[error("unbound symbol {0} while embedding (interpreter state is inconsistent)")]
    Unbound(String),
    #[error("cannot decode node {node}: {reason}")]
    Decode { node: NodeId, reason: String },
}

fn sort_edges(edges: &mut Vec<Edge>) {
    edges.sort_by(|a, b| (a.0, a.1, a.2.name()).cmp(&(b.0, b.1, b.2.name())));
    edges.dedup();
}

impl ChoiceGraph {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<ChoiceGraph, serde_json::Error> {
        let mut g: ChoiceGraph = serde_json::from_str(text)?;
        sort_edges(&mut g.edges);
        Ok(g)
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes not connected to the root when edges are read as undirected.
    pub fn orphans(&self) -> Vec<NodeId> {
        let n = self.nodes.len();
        let mut adj = vec![Vec::new(); n];
        for &(s, d, _) in &self.edges {
            adj[s as usize].push(d);
            adj[d as usize].push(s);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![self.root];
        while let Some(x) = stack.pop() {
            if std::mem::replace(&mut seen[x as usize], true) {
                continue;
            }
            stack.extend(adj[x as usize].iter().copied());
        }
        (0..n as NodeId).filter(|&i| !seen[i as usize]).collect()
    }

    fn incoming(&self, node: NodeId, ty: EdgeType) -> Vec<NodeId> {
        self.edges
            .iter()
            .filter(|e| e.1 == node && e.2 == ty)
            .map(|e| e.0)
            .collect()
    }

    fn outgoing(&self, node: NodeId, ty: EdgeType) -> Option<NodeId> {
        self.edges
            .iter()
            .find(|e| e.0 == node && e.2 == ty)
            .map(|e| e.1)
    }

    /// Orders `nodes` along their ARG-NEXT chain.
    fn chain(&self, nodes: &[NodeId]) -> Vec<NodeId> {
        let next = |x: NodeId| {
            self.edges
                .iter()
                .find(|e| e.0 == x && e.2 == EdgeType::ArgNext && nodes.contains(&e.1))
                .map(|e| e.1)
        };
        let Some(mut cur) = nodes
            .iter()
            .copied()
            .find(|&x| !nodes.iter().any(|&y| next(y) == Some(x)))
        else {
            return Vec::new();
        };
        let mut out = vec![cur];
        while let Some(n) = next(cur) {
            out.push(n);
            cur = n;
        }
        out
    }

    /// Reconstructs the data value summarized by `node`.
    pub fn decode_value(&self, node: NodeId) -> Result<Value, GraphError> {
        let fail = |reason: &str| GraphError::Decode {
            node,
            reason: reason.to_owned(),
        };
        let token = self.nodes.get(node as usize).ok_or_else(|| fail("no such node"))?;
        match token.as_str() {
            "#t" => Ok(Value::Bool(true)),
            "#f" => Ok(Value::Bool(false)),
            "NIL" => Ok(Value::Nil),
            "INT" => {
                let parts = self.chain(&self.incoming(node, EdgeType::ValueSummary));
                let mut negative = false;
                let mut magnitude: i128 = 0;
                for p in parts {
                    match self.nodes[p as usize].as_str() {
                        "INT-SIGN" => negative = true,
                        d => {
                            let d = d.parse::<u8>().map_err(|_| fail("bad digit"))?;
                            magnitude = magnitude * 10 + i128::from(d);
                        }
                    }
                }
                let v = if negative { -magnitude } else { magnitude };
                i64::try_from(v).map(Value::Int).map_err(|_| fail("integer out of range"))
            }
            "CONS" => {
                let head = self.outgoing(node, EdgeType::ConsHead).ok_or_else(|| fail("missing head"))?;
                let tail = self.outgoing(node, EdgeType::ConsTail).ok_or_else(|| fail("missing tail"))?;
                Ok(Value::cons(self.decode_value(head)?, self.decode_value(tail)?))
            }
            "SET" => Ok(Value::set_of(
                self.incoming(node, EdgeType::SetElem)
                    .into_iter()
                    .map(|e| self.decode_value(e))
                    .collect::<Result<Vec<_>, _>>()?,
            )),
            "MAP" => {
                let mut entries = Vec::new();
                for entry in self.incoming(node, EdgeType::MapEntry) {
                    let key = self.incoming(entry, EdgeType::MapKey);
                    let val = self.incoming(entry, EdgeType::MapVal);
                    match (key.as_slice(), val.as_slice()) {
                        ([k], [v]) => entries.push((self.decode_value(*k)?, self.decode_value(*v)?)),
                        _ => return Err(fail("malformed map entry")),
                    }
                }
                Ok(Value::map_of(entries))
            }
            "FN-SUMMARY" => Err(fail("closures are not decodable to values")),
            t if t.starts_with("<prim:") && t.ends_with('>') => crate::primitives::lookup(&t[6..t.len() - 1])
                .map(Value::Primitive)
                .ok_or_else(|| fail("unknown primitive")),
            t if RESERVED_TOKENS.contains(&t) => Err(fail("structural node is not a value")),
            t => Ok(Value::sym(t)),
        }
    }

    /// The printed form of the value at `node`. Closures print as
    /// `<closure (params)>`, like [`Value`]'s display.
    pub fn decode_printed(&self, node: NodeId) -> Result<String, GraphError> {
        if self.nodes.get(node as usize).map(String::as_str) == Some("FN-SUMMARY") {
            let params = self.chain(&self.incoming(node, EdgeType::LambdaParam));
            let names: Vec<&str> = params.iter().map(|&p| self.nodes[p as usize].as_str()).collect();
            return Ok(format!("<closure ({})>", names.join(" ")));
        }
        Ok(self.decode_value(node)?.to_string())
    }

    /// The printed choices, reconstructed from the graph alone.
    pub fn decode_choices(&self) -> Result<Vec<String>, GraphError> {
        self.choices.iter().map(|&c| self.decode_printed(c)).collect()
    }
}

/// Incremental graph construction with value memoization.
pub struct GraphBuilder {
    nodes: Vec<String>,
    edges: Vec<Edge>,
    memo: HashMap<Value, NodeId>,
    limit: usize,
}

impl GraphBuilder {
    pub fn new(limit: usize) -> GraphBuilder {
        GraphBuilder {
            nodes: Vec::new(),
            edges: Vec::new(),
            memo: HashMap::new(),
            limit,
        }
    }

    fn node(&mut self, token: impl Into<String>) -> Result<NodeId, GraphError> {
        if self.nodes.len() >= self.limit {
            return Err(GraphError::Oversize(self.limit));
        }
        self.nodes.push(token.into());
        Ok((self.nodes.len() - 1) as NodeId)
    }

    fn edge(&mut self, src: NodeId, dst: NodeId, ty: EdgeType) {
        self.edges.push((src, dst, ty));
    }

    fn chain(&mut self, ids: &[NodeId]) {
        for w in ids.windows(2) {
            self.edge(w[0], w[1], EdgeType::ArgNext);
        }
    }

    /// Embeds `v`, returning its summary node.
    pub fn embed_value(&mut self, v: &Value) -> Result<NodeId, GraphError> {
        if let Some(&id) = self.memo.get(v) {
            return Ok(id);
        }
        let id = match v {
            Value::Bool(b) => self.node(if *b { "#t" } else { "#f" })?,
            Value::Symbol(s) => self.node(s.as_str())?,
            Value::Nil => self.node("NIL")?,
            Value::Int(i) => {
                let id = self.node("INT")?;
                let mut parts = Vec::new();
                if *i < 0 {
                    parts.push(self.node("INT-SIGN")?);
                }
                for d in i.unsigned_abs().to_string().chars() {
                    parts.push(self.node(d.to_string())?);
                }
                for &p in &parts {
                    self.edge(p, id, EdgeType::ValueSummary);
                }
                self.chain(&parts);
                id
            }
            Value::Pair(p) => {
                let id = self.node("CONS")?;
                let head = self.embed_value(&p.0)?;
                let tail = self.embed_value(&p.1)?;
                self.edge(id, head, EdgeType::ConsHead);
                self.edge(id, tail, EdgeType::ConsTail);
                id
            }
            Value::Set(items) => {
                let id = self.node("SET")?;
                for item in items.iter() {
                    let e = self.embed_value(item)?;
                    self.edge(e, id, EdgeType::SetElem);
                }
                id
            }
            Value::Map(entries) => {
                let id = self.node("MAP")?;
                for (k, val) in entries.iter() {
                    let entry = self.node("PAIR-ENTRY")?;
                    let k = self.embed_value(k)?;
                    let val = self.embed_value(val)?;
                    self.edge(k, entry, EdgeType::MapKey);
                    self.edge(val, entry, EdgeType::MapVal);
                    self.edge(entry, id, EdgeType::MapEntry);
                }
                id
            }
            Value::Primitive(p) => self.node(format!("<prim:{}>", p.name))?,
            Value::Closure(c) => {
                let id = self.node("FN-SUMMARY")?;
                // Registered before the body so recursive references resolve.
                self.memo.insert(v.clone(), id);
                let mut scope = Vec::new();
                let mut params = Vec::new();
                for &p in &c.lambda.params {
                    let pid = self.node(p.as_str())?;
                    self.edge(pid, id, EdgeType::LambdaParam);
                    params.push(pid);
                    scope.push((p, pid));
                }
                self.chain(&params);
                for &s in &c.lambda.free {
                    let val = c.env.try_lookup(s).ok_or_else(|| GraphError::Unbound(s.as_str().into()))?;
                    let vid = self.embed_value(&val)?;
                    self.edge(vid, id, EdgeType::ClosureEnv);
                }
                let body = self.embed_expr_in(&c.lambda.body, &c.env, 0, None, &mut scope)?;
                self.edge(body, id, EdgeType::LambdaBody);
                return Ok(id);
            }
        };
        self.memo.insert(v.clone(), id);
        Ok(id)
    }

    /// Embeds `e` in `env`. The first `evaluated` positions of a top-level
    /// application are marked EVALUATED; `hole` fills the template's Hole.
    pub fn embed_expr(
        &mut self,
        e: &Expr,
        env: &Env,
        evaluated: usize,
        hole: Option<NodeId>,
    ) -> Result<NodeId, GraphError> {
        self.embed_expr_in(e, env, evaluated, hole, &mut Vec::new())
    }

    fn embed_expr_in(
        &mut self,
        e: &Expr,
        env: &Env,
        evaluated: usize,
        hole: Option<NodeId>,
        scope: &mut Vec<(Symbol, NodeId)>,
    ) -> Result<NodeId, GraphError> {
        match e {
            Expr::Const(v) => self.embed_value(v),
            Expr::Hole => match hole {
                Some(id) => Ok(id),
                None => self.node("HOLE"),
            },
            Expr::Var(s) => {
                let target = match scope.iter().rev().find(|(n, _)| n == s) {
                    Some(&(_, pid)) => pid,
                    None => {
                        let v = env.try_lookup(*s).ok_or_else(|| GraphError::Unbound(s.as_str().into()))?;
                        self.embed_value(&v)?
                    }
                };
                let r = self.node(s.as_str())?;
                self.edge(target, r, EdgeType::SymbolBinding);
                Ok(r)
            }
            Expr::Quote(v) => {
                let id = self.node("QUOTE")?;
                let d = self.embed_value(v)?;
                self.edge(d, id, EdgeType::Quoted);
                Ok(id)
            }
            Expr::If(parts) => {
                let id = self.node("IF")?;
                let types = [EdgeType::IfCond, EdgeType::IfThen, EdgeType::IfElse];
                for (part, ty) in parts.iter().zip(types) {
                    let p = self.embed_expr_in(part, env, 0, hole, scope)?;
                    self.edge(p, id, ty);
                }
                Ok(id)
            }
            Expr::Lambda(l) => {
                let id = self.node("LAMBDA")?;
                let depth = scope.len();
                let mut params = Vec::new();
                for &p in &l.params {
                    let pid = self.node(p.as_str())?;
                    self.edge(pid, id, EdgeType::LambdaParam);
                    params.push(pid);
                    scope.push((p, pid));
                }
                self.chain(&params);
                let body = self.embed_expr_in(&l.body, env, 0, hole, scope);
                scope.truncate(depth);
                self.edge(body?, id, EdgeType::LambdaBody);
                Ok(id)
            }
            Expr::Choose(arg) => {
                let id = self.node("CHOOSE")?;
                let a = self.embed_expr_in(arg, env, 0, hole, scope)?;
                self.edge(a, id, EdgeType::ChooseArg);
                Ok(id)
            }
            Expr::Define(name, body) => {
                let id = self.node("DEFINE")?;
                let n = self.node(name.as_str())?;
                self.edge(n, id, EdgeType::DefineName);
                let b = self.embed_expr_in(body, env, 0, hole, scope)?;
                self.edge(b, id, EdgeType::DefineBody);
                Ok(id)
            }
            Expr::App(items) => {
                let id = self.node("APP")?;
                let mut slots = Vec::new();
                for (i, item) in items.iter().enumerate() {
                    let x = self.embed_expr_in(item, env, 0, hole, scope)?;
                    let slot = self.node(if i < evaluated { "EVALUATED" } else { "PENDING" })?;
                    let ty = if i == 0 { EdgeType::AppFn } else { EdgeType::AppArg };
                    self.edge(x, slot, ty);
                    self.edge(slot, id, ty);
                    slots.push(slot);
                }
                self.chain(&slots);
                Ok(id)
            }
        }
    }

    pub fn finish(mut self, choices: Vec<NodeId>, root: NodeId) -> ChoiceGraph {
        sort_edges(&mut self.edges);
        ChoiceGraph {
            nodes: self.nodes,
            edges: self.edges,
            choices,
            root,
        }
    }
}

/// Builds the graph of `cp`: choices feed a CHOICE node, which fills the
/// hole of the innermost segment; each segment's summary fills the next.
pub fn build_choicepoint_graph(cp: &Choicepoint, node_limit: usize) -> Result<ChoiceGraph, GraphError> {
    let mut b = GraphBuilder::new(node_limit);
    let choices = cp
        .choices
        .iter()
        .map(|c| b.embed_value(c))
        .collect::<Result<Vec<_>, _>>()?;
    let choice = b.node("CHOICE")?;
    for &c in &choices {
        b.edge(c, choice, EdgeType::ChoiceOption);
    }
    let mut current = choice;
    for seg in cp.cstack.iter() {
        let summary = b.embed_expr(&seg.template, &seg.env, seg.evaluated, Some(current))?;
        b.edge(current, summary, EdgeType::SegmentResult);
        current = summary;
    }
    Ok(b.finish(choices, current))
}

#[derive(Serialize)]
struct EdgeVocab {
    version: u32,
    edge_types: Vec<&'static str>,
}

/// Contents of the `edge_types.json` sidecar.
pub fn edge_vocab_json() -> String {
    let v = EdgeVocab {
        version: EDGE_VOCAB_VERSION,
        edge_types: EdgeType::ALL.iter().map(|e| e.name()).collect(),
    };
    serde_json::to_string_pretty(&v).expect("vocab serializes")
}

#[derive(Serialize)]
struct TokenVocab<'a> {
    version: u32,
    tokens: Vec<&'a str>,
}

/// Contents of the `vocab.json` sidecar: reserved, literal and primitive
/// tokens first, then every other token in `observed`, sorted. A token's id
/// is its position in the list.
pub fn token_vocab_json<'a>(observed: impl IntoIterator<Item = &'a str>) -> String {
    let prims: Vec<String> = crate::primitives::PRIMITIVES
        .iter()
        .map(|p| format!("<prim:{}>", p.name))
        .collect();
    let mut tokens: Vec<&str> = RESERVED_TOKENS.to_vec();
    tokens.extend_from_slice(LITERAL_TOKENS);
    tokens.extend(prims.iter().map(String::as_str));
    let fixed: std::collections::HashSet<&str> = tokens.iter().copied().collect();
    let mut rest: Vec<&str> = observed.into_iter().filter(|t| !fixed.contains(t)).collect();
    rest.sort_unstable();
    rest.dedup();
    tokens.extend(rest);
    serde_json::to_string_pretty(&TokenVocab {
        version: TOKEN_VOCAB_VERSION,
        tokens,
    })
    .expect("vocab serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::{Budget, Program, StepResult};

    fn choicepoint(p: &Program, src: &str) -> Choicepoint {
        let e = p.parse_expr(src).unwrap();
        match crate::interp::step(e, p.env().clone(), 0, crate::interp::Continuation::new(), &mut Budget::default()).unwrap() {
            StepResult::Suspended(cp) => cp,
            StepResult::Terminal(v) => panic!("expected a choicepoint, got {v}"),
        }
    }

    fn count(g: &ChoiceGraph, token: &str) -> usize {
        g.nodes.iter().filter(|t| *t == token).count()
    }

    #[test]
    fn single_digit_choice_has_three_nodes() {
        let p = Program::new();
        let g = build_choicepoint_graph(&choicepoint(&p, "(choose '(7))"), DEFAULT_NODE_LIMIT).unwrap();
        assert_eq!(g.nodes, ["INT", "7", "CHOICE"]);
        assert_eq!(g.root, 2);
        assert_eq!(g.choices, [0]);
    }

    #[test]
    fn list_embeds_as_cons_chain() {
        let mut b = GraphBuilder::new(100);
        let v = Value::list(vec![Value::Int(0), Value::Int(1)]);
        let root = b.embed_value(&v).unwrap();
        let g = b.finish(vec![], root);
        assert_eq!(count(&g, "CONS"), 2);
        assert_eq!(count(&g, "NIL"), 1);
        assert!(g.orphans().is_empty());
        assert_eq!(g.decode_value(root).unwrap(), v);
    }

    #[test]
    fn negative_integers_carry_a_sign() {
        let mut b = GraphBuilder::new(100);
        let root = b.embed_value(&Value::Int(-305)).unwrap();
        let g = b.finish(vec![], root);
        assert_eq!(g.nodes, ["INT", "INT-SIGN", "3", "0", "5"]);
        assert_eq!(g.decode_value(root).unwrap(), Value::Int(-305));
    }

    #[test]
    fn shared_value_is_embedded_once() {
        let p = Program::new();
        let cp = choicepoint(&p, "((lambda (a b) (cons (choose '(#f #t)) (cons a b))) '(5 6) '(5 6))");
        let g = build_choicepoint_graph(&cp, DEFAULT_NODE_LIMIT).unwrap();
        assert_eq!(count(&g, "CONS"), 2);
        let list = g.nodes.iter().position(|t| t == "CONS").unwrap() as NodeId;
        let refs: Vec<&str> = g
            .edges
            .iter()
            .filter(|e| e.0 == list && e.2 == EdgeType::SymbolBinding)
            .map(|e| g.nodes[e.1 as usize].as_str())
            .collect();
        assert_eq!(refs, ["a", "b"]);
    }

    #[test]
    fn oversize_is_reported() {
        let p = Program::new();
        let cp = choicepoint(&p, "(choose '((0 1 2 3 4 5 6 7 8 9)))");
        assert!(matches!(build_choicepoint_graph(&cp, 10), Err(GraphError::Oversize(10))));
    }

    #[test]
    fn json_round_trips() {
        let p = Program::new();
        let cp = choicepoint(&p, "(+ 1 (choose '(-2 #t x (1 . 2))))");
        let g = build_choicepoint_graph(&cp, DEFAULT_NODE_LIMIT).unwrap();
        let back = ChoiceGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.decode_choices().unwrap(), ["-2", "#t", "x", "(1 . 2)"]);
        assert!(g.orphans().is_empty());
    }

    #[test]
    fn vocab_sidecars_list_fixed_tokens_first() {
        let v: serde_json::Value = serde_json::from_str(&token_vocab_json(["zeta", "CHOICE", "alpha"])).unwrap();
        let tokens: Vec<&str> = v["tokens"].as_array().unwrap().iter().map(|t| t.as_str().unwrap()).collect();
        assert_eq!(tokens[0], "CHOICE");
        assert_eq!(&tokens[tokens.len() - 2..], ["alpha", "zeta"]);
        let e: serde_json::Value = serde_json::from_str(&edge_vocab_json()).unwrap();
        assert_eq!(e["edge_types"].as_array().unwrap().len(), EdgeType::ALL.len());
    }
}
