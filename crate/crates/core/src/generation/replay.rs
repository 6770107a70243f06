//! Record/replay of generation sessions.
//!
//! The log is JSONL, one [`GenerationRecord`] per line. Replay serves
//! responses keyed by [`GenerationRequest::content_hash`], so it tolerates
//! requests arriving in a different order than they were recorded.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::sync::Mutex;

use super::{Backend, GenerationError, GenerationRecord, GenerationRequest};

pub struct RecordingBackend<B> {
    inner: B,
    sink: Mutex<Box<dyn Write + Send>>,
    id: String,
}

/// Wraps `inner`, appending every successful record to `sink`.
pub fn record_session<B: Backend>(inner: B, sink: Box<dyn Write + Send>) -> RecordingBackend<B> {
    let id = format!("record({})", inner.id());
    RecordingBackend {
        inner,
        sink: Mutex::new(sink),
        id,
    }
}

impl<B: Backend> Backend for RecordingBackend<B> {
    fn id(&self) -> &str {
        &self.id
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationRecord, GenerationError> {
        let record = self.inner.generate(request)?;
        let mut line = serde_json::to_string(&record).expect("record serialization is infallible");
        line.push('\n');
        let mut sink = self.sink.lock().unwrap_or_else(|p| p.into_inner());
        sink.write_all(line.as_bytes())?;
        sink.flush()?;
        Ok(record)
    }
}

#[derive(Debug, Default)]
pub struct ReplayBackend {
    records: HashMap<String, GenerationRecord>,
}

/// Loads a replay log. The first record for a given content hash wins.
pub fn open_replay(mut source: impl Read) -> Result<ReplayBackend, GenerationError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    ReplayBackend::from_bytes(&bytes)
}

impl ReplayBackend {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, GenerationError> {
        let mut records = HashMap::new();
        let mut offset = 0u64;
        for line in bytes.split_inclusive(|b| *b == b'\n') {
            let start = offset;
            offset += line.len() as u64;
            if line.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            let record: GenerationRecord = serde_json::from_slice(line).map_err(|e| GenerationError::LogCorrupt {
                offset: start,
                message: e.to_string(),
            })?;
            if record.outputs.len() != record.request.n_samples as usize {
                return Err(GenerationError::LogCorrupt {
                    offset: start,
                    message: format!(
                        "{} outputs recorded for n_samples = {}",
                        record.outputs.len(),
                        record.request.n_samples
                    ),
                });
            }
            records.entry(record.request.content_hash()).or_insert(record);
        }
        Ok(ReplayBackend { records })
    }

    pub fn from_records(records: impl IntoIterator<Item = GenerationRecord>) -> Self {
        let mut map = HashMap::new();
        for r in records {
            map.entry(r.request.content_hash()).or_insert(r);
        }
        ReplayBackend { records: map }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

impl Backend for ReplayBackend {
    fn id(&self) -> &str {
        "replay"
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationRecord, GenerationError> {
        let hash = request.content_hash();
        let recorded = self.records.get(&hash).ok_or(GenerationError::ReplayMiss(hash))?;
        Ok(GenerationRecord {
            request: request.clone(),
            ..recorded.clone()
        })
    }
}
