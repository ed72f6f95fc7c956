//! Oracle-guided decision programming.
//!
//! Programs are written in a small Scheme dialect extended with `choose`.
//! The interpreter ([`interp`]) evaluates a program until it produces either
//! a value or a [`interp::Choicepoint`]: the candidate values together with a
//! reified continuation. Search drivers ([`search`]) resume choicepoints
//! under the guidance of an oracle ([`oracle`]), which sees each choicepoint
//! through its graph encoding ([`graph`]). [`suite`] generates the synthetic
//! prediction tasks used to train and evaluate oracles.

pub mod dataset;
pub mod expr;
pub mod graph;
pub mod interp;
pub mod oracle;
pub mod primitives;
pub mod reader;
pub mod report;
pub mod rng;
pub mod search;
pub mod suite;
pub mod value;

use thiserror::Error;

pub use interp::{Budget, Choicepoint, Program, StepResult};
pub use value::{Env, Symbol, Value};

#[derive(Debug, Error)]
pub enum Error {
    #[error("read error: {0}")]
    Read(#[from] reader::ReadError),
    #[error("runtime error: {0}")]
    Eval(#[from] interp::EvalError),
    #[error("{0}")]
    Usage(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
