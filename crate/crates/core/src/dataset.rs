//! Dataset records shared by the generator, the evaluator and oracle servers.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

/// One decision of one episode, labelled with the correct choice.
#[derive(Debug, Serialize, Deserialize)]
pub struct Datapoint {
    pub task_id: String,
    pub episode: usize,
    pub decision: usize,
    pub num_choices: usize,
    pub correct: usize,
    pub graph: Box<RawValue>,
}

impl Clone for Datapoint {
    fn clone(&self) -> Datapoint {
        Datapoint {
            task_id: self.task_id.clone(),
            episode: self.episode,
            decision: self.decision,
            num_choices: self.num_choices,
            correct: self.correct,
            graph: self.graph.to_owned(),
        }
    }
}

impl Datapoint {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("datapoint serializes")
    }
}

pub fn write_jsonl<'a>(path: &Path, points: impl IntoIterator<Item = &'a Datapoint>) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for p in points {
        writeln!(w, "{}", p.to_json_line())?;
    }
    w.flush()
}

pub fn read_jsonl(path: &Path) -> Result<Vec<Datapoint>, crate::Error> {
    let mut out = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}
