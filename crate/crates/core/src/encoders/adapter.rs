//! Adapter for real pretrained models running in an external process.
//!
//! The process reads one JSON request per line on stdin and answers with
//! one JSON object per line on stdout:
//!
//! | request                                                      | response                                      |
//! |--------------------------------------------------------------|-----------------------------------------------|
//! | `{"op":"ping"}`                                              | `{"dim":768,"markers":3,"capacity":512,"fingerprint":"..."}` |
//! | `{"op":"fill_mask","tokens":[..],"index":i,"top_k":k}`       | `{"suggestions":[{"token":"..","score":0.3}]}` |
//! | `{"op":"word_vector","token":".."}`                          | `{"vector":[..]}`                             |
//! | `{"op":"sentence_vector","text":"..","lang":".."}`           | `{"vector":[..]}`                             |
//! | `{"op":"encode_pair","source":[..],"target":[..],"source_lang":"en","target_lang":".."}` | `{"matrix":[[..],..]}` |
//!
//! Any response may instead be `{"error":"message"}`. The process is probed
//! with `ping` when the adapter is created. Calls are serialized through one
//! lane, so a single process never sees concurrent requests.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use ndarray::Array2;
use serde_json::{json, Value};

use super::{
    check_pair_input, ContextualEncoder, EncoderError, MaskFiller, MaskSuggestion, SentenceEncoder, Vector,
    WordVectors,
};
use crate::corpus::TokenSequence;
use crate::hashing::sha256_hex;

struct Lane {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

pub struct ProcessAdapter {
    command: Vec<String>,
    lane: Mutex<Lane>,
    dim: usize,
    markers: usize,
    capacity: usize,
    reported_fingerprint: String,
}

fn backend(msg: impl Into<String>) -> EncoderError {
    EncoderError::Backend(msg.into())
}

impl ProcessAdapter {
    /// Starts the process and probes it. `expected_dim`, when given, must
    /// match the dimension the process reports.
    pub fn spawn(command: &[String], expected_dim: Option<usize>) -> Result<Self, EncoderError> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| EncoderError::Config("adapter command is empty".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| backend(format!("cannot start adapter {program:?}: {e}")))?;
        let stdin = child.stdin.take().ok_or_else(|| backend("adapter stdin unavailable"))?;
        let stdout = BufReader::new(child.stdout.take().ok_or_else(|| backend("adapter stdout unavailable"))?);
        let mut adapter = ProcessAdapter {
            command: command.to_vec(),
            lane: Mutex::new(Lane { child, stdin, stdout }),
            dim: 0,
            markers: 0,
            capacity: 0,
            reported_fingerprint: String::new(),
        };
        let info = adapter.request(json!({"op": "ping"}))?;
        let field = |k: &str| info.get(k).and_then(Value::as_u64).map(|v| v as usize);
        adapter.dim = field("dim").ok_or_else(|| backend("ping response lacks dim"))?;
        adapter.markers = field("markers").unwrap_or(0);
        adapter.capacity = field("capacity").unwrap_or(usize::MAX);
        adapter.reported_fingerprint = info
            .get("fingerprint")
            .and_then(Value::as_str)
            .unwrap_or_default()
            .to_string();
        if let Some(d) = expected_dim {
            if d != adapter.dim {
                return Err(EncoderError::Config(format!(
                    "adapter reports dim {}, configuration says {d}",
                    adapter.dim
                )));
            }
        }
        Ok(adapter)
    }

    fn request(&self, req: Value) -> Result<Value, EncoderError> {
        let mut lane = self.lane.lock().map_err(|_| backend("adapter lane poisoned"))?;
        let mut line = req.to_string();
        line.push('\n');
        lane.stdin
            .write_all(line.as_bytes())
            .and_then(|_| lane.stdin.flush())
            .map_err(|e| backend(format!("adapter write failed: {e}")))?;
        let mut reply = String::new();
        let n = lane
            .stdout
            .read_line(&mut reply)
            .map_err(|e| backend(format!("adapter read failed: {e}")))?;
        if n == 0 {
            return Err(backend("adapter closed its output"));
        }
        let value: Value =
            serde_json::from_str(&reply).map_err(|e| backend(format!("adapter sent invalid JSON: {e}")))?;
        if let Some(err) = value.get("error") {
            return Err(backend(err.as_str().unwrap_or("unspecified adapter error").to_string()));
        }
        Ok(value)
    }

    fn vector_from(&self, value: &Value) -> Result<Vector, EncoderError> {
        let values = parse_floats(value.get("vector"))?;
        if values.len() != self.dim {
            return Err(EncoderError::DimMismatch(self.dim, values.len()));
        }
        Ok(Vector::new(values))
    }
}

fn parse_floats(value: Option<&Value>) -> Result<Vec<f64>, EncoderError> {
    let arr = value
        .and_then(Value::as_array)
        .ok_or_else(|| backend("expected an array of numbers"))?;
    arr.iter()
        .map(|x| {
            x.as_f64()
                .filter(|v| v.is_finite())
                .ok_or_else(|| backend("non-finite or non-numeric value"))
        })
        .collect()
}

impl Drop for ProcessAdapter {
    fn drop(&mut self) {
        if let Ok(lane) = self.lane.get_mut() {
            let _ = lane.child.kill();
            let _ = lane.child.wait();
        }
    }
}

impl MaskFiller for ProcessAdapter {
    fn fill_mask(
        &self,
        tokens: &TokenSequence,
        mask_index: usize,
        top_k: usize,
    ) -> Result<Vec<MaskSuggestion>, EncoderError> {
        if mask_index > tokens.len() {
            return Err(EncoderError::MaskIndex {
                index: mask_index,
                len: tokens.len(),
            });
        }
        if top_k == 0 {
            return Ok(Vec::new());
        }
        let reply = self.request(json!({
            "op": "fill_mask",
            "tokens": tokens.to_strings(),
            "index": mask_index,
            "top_k": top_k,
        }))?;
        let mut out: Vec<MaskSuggestion> = serde_json::from_value(reply["suggestions"].clone())
            .map_err(|e| backend(format!("bad suggestions: {e}")))?;
        out.retain(|s| !s.token.is_empty() && s.score.is_finite());
        out.sort_by(|a, b| b.score.total_cmp(&a.score));
        out.truncate(top_k);
        Ok(out)
    }
}

impl WordVectors for ProcessAdapter {
    fn dim(&self) -> usize {
        self.dim
    }

    fn word_vector(&self, token: &str) -> Result<Vector, EncoderError> {
        let v = self.vector_from(&self.request(json!({"op": "word_vector", "token": token}))?)?;
        if v.is_zero() {
            return Err(backend(format!("adapter returned a zero vector for {token:?}")));
        }
        Ok(v)
    }
}

impl SentenceEncoder for ProcessAdapter {
    fn dim(&self) -> usize {
        self.dim
    }

    fn encode(&self, text: &str, lang: &str) -> Result<Vector, EncoderError> {
        self.vector_from(&self.request(json!({"op": "sentence_vector", "text": text, "lang": lang}))?)
    }
}

impl ContextualEncoder for ProcessAdapter {
    fn dim(&self) -> usize {
        self.dim
    }

    fn marker_slots(&self) -> usize {
        self.markers
    }

    fn capacity(&self) -> usize {
        self.capacity
    }

    fn encode_pair(&self, source: &TokenSequence, target: &TokenSequence) -> Result<Array2<f64>, EncoderError> {
        let len = check_pair_input(self, source, target)?;
        let reply = self.request(json!({
            "op": "encode_pair",
            "source": source.to_strings(),
            "target": target.to_strings(),
            "source_lang": source.lang,
            "target_lang": target.lang,
        }))?;
        let rows = reply
            .get("matrix")
            .and_then(Value::as_array)
            .ok_or_else(|| backend("encode_pair response lacks matrix"))?;
        if rows.len() != len {
            return Err(backend(format!("adapter returned {} rows, expected {len}", rows.len())));
        }
        let mut out = Array2::zeros((len, self.dim));
        for (i, row) in rows.iter().enumerate() {
            let values = parse_floats(Some(row))?;
            if values.len() != self.dim {
                return Err(EncoderError::DimMismatch(self.dim, values.len()));
            }
            out.row_mut(i).assign(&ndarray::ArrayView1::from(&values));
        }
        Ok(out)
    }

    fn fingerprint(&self) -> String {
        let desc = json!({
            "kind": "adapter",
            "command": self.command,
            "dim": self.dim,
            "markers": self.markers,
            "reported": self.reported_fingerprint,
        });
        sha256_hex(desc.to_string().as_bytes())
    }
}
