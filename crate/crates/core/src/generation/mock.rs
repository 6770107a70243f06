//! Deterministic scripted backend.
//!
//! A script is JSONL. Each line is `{"outputs": [...]}` or
//! `{"tag": T, "outputs": [...]}` or `{"tag": T, "error": "message"}`.
//!
//! * Untagged lines feed one shared FIFO of output strings; a request pops
//!   `n_samples` of them.
//! * Tagged lines form a response list per tag. A request is matched on its
//!   full tag, then on the component after the last `/` (so `"time"` answers
//!   `"d17/time"`). Responses are served in order and the last one repeats
//!   once the list is exhausted, which keeps results independent of request
//!   interleaving.

use std::collections::{HashMap, VecDeque};
use std::sync::Mutex;

use serde::Deserialize;

use super::{Backend, GenerationError, GenerationRecord, GenerationRequest};
use std::time::Duration;

#[derive(Debug, Clone, PartialEq)]
enum Response {
    Outputs(Vec<String>),
    Error(String),
}

#[derive(Debug, Deserialize)]
struct ScriptLine {
    #[serde(default)]
    tag: Option<String>,
    #[serde(default)]
    outputs: Option<Vec<String>>,
    #[serde(default)]
    error: Option<String>,
}

#[derive(Debug, Default)]
struct ScriptState {
    queue: VecDeque<String>,
    cursors: HashMap<String, usize>,
}

#[derive(Debug, Default)]
pub struct ScriptedBackend {
    tagged: HashMap<String, Vec<Response>>,
    state: Mutex<ScriptState>,
}

impl ScriptedBackend {
    /// Backend that serves a plain FIFO of outputs.
    pub fn from_queue<S: Into<String>>(outputs: impl IntoIterator<Item = S>) -> Self {
        let backend = ScriptedBackend::default();
        backend.state.lock().unwrap().queue = outputs.into_iter().map(Into::into).collect();
        backend
    }

    pub fn with_tagged<S: Into<String>>(mut self, tag: &str, outputs: impl IntoIterator<Item = S>) -> Self {
        self.tagged
            .entry(tag.to_string())
            .or_default()
            .push(Response::Outputs(outputs.into_iter().map(Into::into).collect()));
        self
    }

    pub fn with_tagged_error(mut self, tag: &str, message: &str) -> Self {
        self.tagged
            .entry(tag.to_string())
            .or_default()
            .push(Response::Error(message.to_string()));
        self
    }

    pub fn from_script(text: &str) -> Result<Self, GenerationError> {
        let mut backend = ScriptedBackend::default();
        let mut queue = VecDeque::new();
        let mut offset = 0u64;
        for line in text.split_inclusive('\n') {
            let start = offset;
            offset += line.len() as u64;
            if line.trim().is_empty() {
                continue;
            }
            let entry: ScriptLine = serde_json::from_str(line).map_err(|e| GenerationError::LogCorrupt {
                offset: start,
                message: e.to_string(),
            })?;
            let response = match (entry.outputs, entry.error) {
                (Some(o), None) => Response::Outputs(o),
                (None, Some(e)) => Response::Error(e),
                _ => {
                    return Err(GenerationError::LogCorrupt {
                        offset: start,
                        message: "script line needs exactly one of outputs or error".into(),
                    })
                }
            };
            match (entry.tag, response) {
                (Some(tag), r) => backend.tagged.entry(tag).or_default().push(r),
                (None, Response::Outputs(o)) => queue.extend(o),
                (None, Response::Error(_)) => {
                    return Err(GenerationError::LogCorrupt {
                        offset: start,
                        message: "error lines need a tag".into(),
                    })
                }
            }
        }
        backend.state.get_mut().unwrap().queue = queue;
        Ok(backend)
    }

    fn tagged_response(&self, tag: &str) -> Option<Response> {
        let key = if self.tagged.contains_key(tag) {
            tag
        } else {
            let last = tag.rsplit('/').next()?;
            if !self.tagged.contains_key(last) {
                return None;
            }
            last
        };
        let responses = &self.tagged[key];
        let mut state = self.state.lock().unwrap();
        let cursor = state.cursors.entry(key.to_string()).or_insert(0);
        let response = responses[(*cursor).min(responses.len() - 1)].clone();
        *cursor += 1;
        Some(response)
    }
}

impl Backend for ScriptedBackend {
    fn id(&self) -> &str {
        "mock"
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationRecord, GenerationError> {
        let n = request.n_samples.max(1) as usize;
        let outputs = match self.tagged_response(&request.tag) {
            Some(Response::Error(message)) => return Err(GenerationError::Backend(message)),
            Some(Response::Outputs(outputs)) if outputs.is_empty() => {
                return Err(GenerationError::Backend(format!(
                    "empty script entry for tag {:?}",
                    request.tag
                )))
            }
            Some(Response::Outputs(outputs)) => outputs.iter().cycle().take(n).cloned().collect(),
            None => {
                let mut state = self.state.lock().unwrap();
                if state.queue.len() < n {
                    return Err(GenerationError::Backend(format!(
                        "script exhausted: wanted {n} outputs, {} left",
                        state.queue.len()
                    )));
                }
                state.queue.drain(..n).collect()
            }
        };
        let mut record = GenerationRecord::new(request, outputs, self.id(), Duration::ZERO);
        record.timestamp_ms = 0;
        Ok(record)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifo_queue() {
        let b = ScriptedBackend::from_queue(["a", "b"]);
        let rec = b.generate(&GenerationRequest::new("p").with_sampling(2, 0.8)).unwrap();
        assert_eq!(rec.outputs, vec!["a", "b"]);
        assert!(matches!(
            b.generate(&GenerationRequest::new("p")),
            Err(GenerationError::Backend(_))
        ));
    }

    #[test]
    fn tagged_by_slot_suffix() {
        let script = r#"{"tag": "name", "outputs": ["john"]}
{"tag": "time", "outputs": ["3pm"]}
{"tag": "stylist", "error": "boom"}
"#;
        let b = ScriptedBackend::from_script(script).unwrap();
        for _ in 0..3 {
            let rec = b.generate(&GenerationRequest::new("x").with_tag("d1/time")).unwrap();
            assert_eq!(rec.outputs, vec!["3pm"]);
        }
        let err = b
            .generate(&GenerationRequest::new("x").with_tag("d1/stylist"))
            .unwrap_err();
        assert!(matches!(err, GenerationError::Backend(m) if m == "boom"));
    }

    #[test]
    fn tagged_sequence_repeats_last() {
        let b = ScriptedBackend::default()
            .with_tagged("t", ["1"])
            .with_tagged("t", ["2"]);
        let req = GenerationRequest::new("x").with_tag("t");
        let got: Vec<String> = (0..3).map(|_| b.generate(&req).unwrap().outputs[0].clone()).collect();
        assert_eq!(got, ["1", "2", "2"]);
    }

    #[test]
    fn bad_script() {
        match ScriptedBackend::from_script("{\"outputs\": [\"a\"]}\n{oops\n") {
            Err(GenerationError::LogCorrupt { offset, .. }) => assert_eq!(offset, 19),
            other => panic!("unexpected {other:?}"),
        }
    }
}
