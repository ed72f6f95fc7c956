//! Policy/value oracles, the remote wire protocol, and the evaluation metric.
//!
//! Wire protocol: newline-delimited JSON over a child process's stdin/stdout
//! or a TCP socket. Requests are `{"id": int, "graph": <graph>}`, responses
//! `{"id": int, "policy": [float...], "value": float|null}`. Responses may
//! arrive in any order.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::process::{Child, Command, Stdio};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::mpsc::{self, Sender};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dataset::Datapoint;
use crate::graph::{build_choicepoint_graph, ChoiceGraph};
use crate::interp::Choicepoint;
use crate::search::{uniform_scores, validate_scores, PolicyValue, SearchError};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);
pub const PROBABILITY_FLOOR: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyEstimate {
    pub policy: Vec<f64>,
    pub value: Option<f64>,
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("no choices to score")]
    NoChoices,
    #[error("oracle timed out after {0:?}")]
    Timeout(Duration),
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("policy has {got} entries for {expected} choices")]
    LengthMismatch { expected: usize, got: usize },
    #[error("oracle connection closed: {0}")]
    Disconnected(String),
    #[error("no label known for this graph")]
    UnknownGraph,
    #[error("empty datapoint list")]
    Empty,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// A policy/value provider. `graph_json` is the serialized choicepoint
/// graph; it may be empty when [`Oracle::needs_graph`] is false.
pub trait Oracle: Send + Sync {
    fn estimate(&self, graph_json: &str, num_choices: usize) -> Result<PolicyEstimate, OracleError>;

    fn needs_graph(&self) -> bool {
        true
    }
}

/// Checks a policy against the choice count and the value range.
pub fn validate_estimate(est: &PolicyEstimate, n: usize) -> Result<(), OracleError> {
    if est.policy.len() != n {
        return Err(OracleError::LengthMismatch {
            expected: n,
            got: est.policy.len(),
        });
    }
    validate_scores(&est.policy, n).map_err(|e| OracleError::Malformed(e.to_string()))?;
    match est.value {
        Some(v) if !(0.0..=1.0).contains(&v) => Err(OracleError::Malformed(format!("value {v} outside [0, 1]"))),
        _ => Ok(()),
    }
}

pub struct UniformOracle;

impl Oracle for UniformOracle {
    fn estimate(&self, _: &str, n: usize) -> Result<PolicyEstimate, OracleError> {
        if n == 0 {
            return Err(OracleError::NoChoices);
        }
        Ok(PolicyEstimate {
            policy: uniform_scores(n),
            value: Some(0.5),
        })
    }

    fn needs_graph(&self) -> bool {
        false
    }
}

fn graph_key(graph_json: &str) -> [u8; 32] {
    Sha256::digest(graph_json.as_bytes()).into()
}

/// Looks up the labelled choice of a known graph and puts probability
/// `confidence` on it (or, when adversarial, on the next choice instead).
/// The remaining mass is shared equally.
pub struct ReplayOracle {
    labels: HashMap<[u8; 32], usize>,
    confidence: f64,
    adversarial: bool,
}

impl ReplayOracle {
    pub fn new<'a>(points: impl IntoIterator<Item = &'a Datapoint>, confidence: f64, adversarial: bool) -> ReplayOracle {
        let labels = points
            .into_iter()
            .map(|p| (graph_key(p.graph.get()), p.correct))
            .collect();
        ReplayOracle {
            labels,
            confidence,
            adversarial,
        }
    }

    /// A label table built directly from `(graph json, correct index)`.
    pub fn from_labels<'a>(labels: impl IntoIterator<Item = (&'a str, usize)>, confidence: f64) -> ReplayOracle {
        ReplayOracle {
            labels: labels.into_iter().map(|(g, c)| (graph_key(g), c)).collect(),
            confidence,
            adversarial: false,
        }
    }
}

/// `p` on `target`, the rest spread evenly.
pub fn peaked_policy(n: usize, target: usize, p: f64) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let rest = (1.0 - p) / (n - 1) as f64;
    (0..n).map(|i| if i == target { p } else { rest }).collect()
}

impl Oracle for ReplayOracle {
    fn estimate(&self, graph_json: &str, n: usize) -> Result<PolicyEstimate, OracleError> {
        if n == 0 {
            return Err(OracleError::NoChoices);
        }
        let correct = *self.labels.get(&graph_key(graph_json)).ok_or(OracleError::UnknownGraph)?;
        let target = if self.adversarial { (correct + 1) % n } else { correct };
        Ok(PolicyEstimate {
            policy: peaked_policy(n, target, self.confidence),
            value: None,
        })
    }
}

#[derive(Serialize)]
struct Request<'a> {
    id: u64,
    graph: &'a RawValue,
}

#[derive(Serialize, Deserialize)]
struct Response {
    id: u64,
    #[serde(default)]
    policy: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    /// Set instead of a policy when the server could not answer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

type Waiters = Arc<Mutex<HashMap<u64, Sender<Result<PolicyEstimate, String>>>>>;

/// An oracle reached over the wire protocol. Concurrent callers share one
/// connection; a reader thread routes responses to callers by id.
pub struct RemoteOracle {
    writer: Mutex<Box<dyn Write + Send>>,
    waiters: Waiters,
    closed: Arc<Mutex<Option<String>>>,
    next_id: AtomicU64,
    timeout: Duration,
    child: Option<Mutex<Child>>,
}

impl RemoteOracle {
    /// Parses `exec:<command>` or `tcp:<host:port>`.
    pub fn connect(endpoint: &str) -> Result<RemoteOracle, OracleError> {
        if let Some(cmd) = endpoint.strip_prefix("exec:") {
            RemoteOracle::spawn(cmd)
        } else if let Some(addr) = endpoint.strip_prefix("tcp:") {
            RemoteOracle::tcp(addr)
        } else {
            Err(OracleError::Disconnected(format!("unsupported endpoint {endpoint}")))
        }
    }

    pub fn spawn(command: &str) -> Result<RemoteOracle, OracleError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let mut oracle = RemoteOracle::from_streams(Box::new(stdin), Box::new(stdout));
        oracle.child = Some(Mutex::new(child));
        Ok(oracle)
    }

    pub fn tcp(addr: &str) -> Result<RemoteOracle, OracleError> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        let reader = stream.try_clone()?;
        Ok(RemoteOracle::from_streams(Box::new(stream), Box::new(reader)))
    }

    pub fn from_streams(writer: Box<dyn Write + Send>, reader: Box<dyn std::io::Read + Send>) -> RemoteOracle {
        let waiters: Waiters = Arc::default();
        let closed: Arc<Mutex<Option<String>>> = Arc::default();
        let (w, c) = (waiters.clone(), closed.clone());
        thread::spawn(move || {
            let mut reason = "end of stream".to_string();
            for line in BufReader::new(reader).lines() {
                let line = match line {
                    Ok(l) => l,
                    Err(e) => {
                        reason = e.to_string();
                        break;
                    }
                };
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<Response>(&line) {
                    Ok(r) => {
                        if let Some(tx) = w.lock().unwrap().remove(&r.id) {
                            let _ = tx.send(match r.error {
                                Some(e) => Err(e),
                                None => Ok(PolicyEstimate {
                                    policy: r.policy,
                                    value: r.value,
                                }),
                            });
                        } else {
                            log::warn!("oracle response for unknown id {}", r.id);
                        }
                    }
                    Err(e) => log::warn!("unparseable oracle response: {e}"),
                }
            }
            *c.lock().unwrap() = Some(reason.clone());
            for (_, tx) in w.lock().unwrap().drain() {
                let _ = tx.send(Err(reason.clone()));
            }
        });
        RemoteOracle {
            writer: Mutex::new(writer),
            waiters,
            closed,
            next_id: AtomicU64::new(1),
            timeout: DEFAULT_TIMEOUT,
            child: None,
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> RemoteOracle {
        self.timeout = timeout;
        self
    }
}

impl Oracle for RemoteOracle {
    fn estimate(&self, graph_json: &str, n: usize) -> Result<PolicyEstimate, OracleError> {
        let graph: &RawValue = serde_json::from_str(graph_json).map_err(|e| OracleError::Malformed(e.to_string()))?;
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let (tx, rx) = mpsc::channel();
        {
            let mut waiters = self.waiters.lock().unwrap();
            if let Some(reason) = self.closed.lock().unwrap().clone() {
                return Err(OracleError::Disconnected(reason));
            }
            waiters.insert(id, tx);
        }
        let line = serde_json::to_string(&Request { id, graph }).expect("request serializes");
        let sent = {
            let mut w = self.writer.lock().unwrap();
            writeln!(w, "{line}").and_then(|_| w.flush())
        };
        if let Err(e) = sent {
            self.waiters.lock().unwrap().remove(&id);
            return Err(OracleError::Disconnected(e.to_string()));
        }
        let est = match rx.recv_timeout(self.timeout) {
            Ok(Ok(est)) => est,
            Ok(Err(reason)) => return Err(OracleError::Malformed(reason)),
            Err(_) => {
                self.waiters.lock().unwrap().remove(&id);
                return Err(OracleError::Timeout(self.timeout));
            }
        };
        validate_estimate(&est, n)?;
        Ok(est)
    }
}

impl Drop for RemoteOracle {
    fn drop(&mut self) {
        if let Some(child) = &self.child {
            let mut child = child.lock().unwrap();
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

#[derive(Deserialize)]
struct IncomingRequest {
    id: u64,
    graph: ChoiceGraph,
}

/// Answers wire-protocol requests from `input` with `oracle`, in order,
/// until end of input. The server side of [`RemoteOracle`]. A request that
/// cannot be parsed or answered gets an error response with its id (0 if
/// the id is unreadable) and the server keeps going.
pub fn serve(oracle: &dyn Oracle, input: impl BufRead, mut output: impl Write) -> Result<(), OracleError> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let resp = match serde_json::from_str::<IncomingRequest>(&line) {
            Ok(req) => {
                // Graphs are re-serialized canonically so that lookups do
                // not depend on the client's formatting.
                let graph_json = if oracle.needs_graph() { req.graph.to_json() } else { String::new() };
                match oracle.estimate(&graph_json, req.graph.choices.len()) {
                    Ok(est) => Response {
                        id: req.id,
                        policy: est.policy,
                        value: est.value,
                        error: None,
                    },
                    Err(e) => error_response(req.id, e.to_string()),
                }
            }
            Err(e) => {
                let id = serde_json::from_str::<serde_json::Value>(&line)
                    .ok()
                    .and_then(|v| v.get("id").and_then(|i| i.as_u64()))
                    .unwrap_or(0);
                error_response(id, format!("malformed request: {e}"))
            }
        };
        writeln!(output, "{}", serde_json::to_string(&resp).expect("response serializes"))?;
        output.flush()?;
    }
    Ok(())
}

fn error_response(id: u64, error: String) -> Response {
    Response {
        id,
        policy: Vec::new(),
        value: None,
        error: Some(error),
    }
}

/// Adapts an oracle for the search drivers. Oracle failures are logged,
/// counted in `failures`, and replaced by the uniform policy.
pub struct SearchOracle<'a> {
    oracle: &'a dyn Oracle,
    node_limit: usize,
    pub failures: AtomicUsize,
}

impl<'a> SearchOracle<'a> {
    pub fn new(oracle: &'a dyn Oracle, node_limit: usize) -> SearchOracle<'a> {
        SearchOracle {
            oracle,
            node_limit,
            failures: AtomicUsize::new(0),
        }
    }

    pub fn policy_value(&self, cp: &Choicepoint) -> PolicyValue {
        let n = cp.choices.len();
        let result = if self.oracle.needs_graph() {
            build_choicepoint_graph(cp, self.node_limit)
                .map_err(|e| OracleError::Malformed(e.to_string()))
                .and_then(|g| self.oracle.estimate(&g.to_json(), n))
        } else {
            self.oracle.estimate("", n)
        };
        match result.and_then(|est| validate_estimate(&est, n).map(|_| est)) {
            Ok(est) => (est.policy, est.value.unwrap_or(0.5)),
            Err(e) => {
                log::warn!("oracle failure, using the uniform policy: {e}");
                self.failures.fetch_add(1, Ordering::Relaxed);
                (uniform_scores(n), 0.5)
            }
        }
    }

    pub fn score(&self, cp: &Choicepoint) -> Result<Vec<f64>, SearchError> {
        Ok(self.policy_value(cp).0)
    }

    pub fn failure_count(&self) -> usize {
        self.failures.load(Ordering::Relaxed)
    }
}

/// Losses of one task. Natural logarithms throughout.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metric {
    pub datapoints: usize,
    pub actual_loss: f64,
    pub uniform_loss: f64,
    pub metric: f64,
}

/// `log(uniformLoss / actualLoss)` over `(num_choices, p_correct)` pairs.
/// Decisions with fewer than two choices are skipped.
pub fn nll_metric(points: impl IntoIterator<Item = (usize, f64)>) -> Result<Metric, OracleError> {
    let (mut count, mut actual, mut uniform) = (0usize, 0.0, 0.0);
    for (n, p) in points {
        if n < 2 {
            continue;
        }
        count += 1;
        actual += -p.clamp(PROBABILITY_FLOOR, 1.0).ln();
        uniform += (n as f64).ln();
    }
    if count == 0 {
        return Err(OracleError::Empty);
    }
    let (actual_loss, uniform_loss) = (actual / count as f64, uniform / count as f64);
    Ok(Metric {
        datapoints: count,
        actual_loss,
        uniform_loss,
        metric: (uniform_loss / actual_loss).ln(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Evaluation {
    /// Per task id, in sorted order.
    pub tasks: BTreeMap<String, Metric>,
    pub queries: usize,
    pub oracle_failures: usize,
}

/// Scores every datapoint with `oracle` and computes per-task metrics.
/// Oracle failures count as uniform predictions. Tasks with no multi-choice
/// datapoints are omitted.
pub fn evaluate(points: &[Datapoint], oracle: &dyn Oracle) -> Evaluation {
    use rayon::prelude::*;
    let scored: Vec<(usize, f64, bool)> = points
        .par_iter()
        .map(|d| {
            let graph = if oracle.needs_graph() { d.graph.get() } else { "" };
            match oracle.estimate(graph, d.num_choices) {
                Ok(est) if validate_estimate(&est, d.num_choices).is_ok() => (d.num_choices, est.policy[d.correct], false),
                Ok(_) | Err(_) => (d.num_choices, 1.0 / d.num_choices as f64, true),
            }
        })
        .collect();
    let mut by_task: BTreeMap<&str, Vec<(usize, f64)>> = BTreeMap::new();
    for (d, &(n, p, _)) in points.iter().zip(&scored) {
        by_task.entry(d.task_id.as_str()).or_default().push((n, p));
    }
    let tasks = by_task
        .into_iter()
        .filter_map(|(t, pts)| nll_metric(pts).ok().map(|m| (t.to_owned(), m)))
        .collect();
    Evaluation {
        tasks,
        queries: scored.len(),
        oracle_failures: scored.iter().filter(|s| s.2).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_policies() {
        assert_eq!(UniformOracle.estimate("", 2).unwrap().policy, [0.5, 0.5]);
        assert_eq!(UniformOracle.estimate("", 1).unwrap().policy, [1.0]);
        assert!(UniformOracle.estimate("", 10).unwrap().policy.iter().all(|p| (p - 0.1).abs() < 1e-15));
        assert!(matches!(UniformOracle.estimate("", 0), Err(OracleError::NoChoices)));
    }

    #[test]
    fn metric_examples() {
        let m = nll_metric(vec![(2, 0.5); 10]).unwrap();
        assert!(m.metric.abs() < 1e-12);
        let m = nll_metric(vec![(2, 0.9); 10]).unwrap();
        assert!((m.metric - 1.884).abs() < 1e-3, "{}", m.metric);
        let m = nll_metric(vec![(2, 0.25); 3]).unwrap();
        assert!((m.metric + 0.693).abs() < 1e-3, "{}", m.metric);
        assert!(matches!(nll_metric(vec![(1, 1.0)]), Err(OracleError::Empty)));
        let m = nll_metric(vec![(2, 0.0)]).unwrap();
        assert!(m.metric.is_finite());
    }

    #[test]
    fn estimate_validation() {
        let bad = PolicyEstimate {
            policy: vec![0.2, 0.3, 0.5],
            value: None,
        };
        assert!(matches!(
            validate_estimate(&bad, 2),
            Err(OracleError::LengthMismatch { expected: 2, got: 3 })
        ));
        let bad = PolicyEstimate {
            policy: vec![0.5, 0.5],
            value: Some(1.5),
        };
        assert!(validate_estimate(&bad, 2).is_err());
    }

    #[test]
    fn peaked_policy_sums_to_one() {
        let p = peaked_policy(4, 2, 0.7);
        assert_eq!(p[2], 0.7);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn serve_answers_each_request() {
        let input = "{\"id\":7,\"graph\":{\"nodes\":[\"#f\",\"#t\",\"CHOICE\"],\"edges\":[[0,2,\"CHOICE-OPTION\"],[1,2,\"CHOICE-OPTION\"]],\"choices\":[0,1],\"root\":2}}\n";
        let mut out = Vec::new();
        serve(&UniformOracle, input.as_bytes(), &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "{\"id\":7,\"policy\":[0.5,0.5],\"value\":0.5}\n");
    }
}
