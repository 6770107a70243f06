//! Text-generation backends.
//!
//! Every backend implements [`Backend`]. Pipelines are written against the
//! trait and can run on a live chat-completion server ([`http`]), a scripted
//! mock ([`mock`]), or a replay log ([`replay`]) with identical results.

pub mod http;
pub mod limit;
pub mod mock;
pub mod replay;
pub mod spec;

use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use http::{HttpBackend, HttpConfig};
pub use limit::InFlightLimit;
pub use mock::ScriptedBackend;
pub use replay::{open_replay, record_session, RecordingBackend, ReplayBackend};
pub use spec::BackendSpec;

pub const DEFAULT_MAX_TOKENS: u32 = 256;

#[derive(Debug, Error)]
pub enum GenerationError {
    #[error("backend error: {0}")]
    Backend(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("no recorded response for request hash {0}")]
    ReplayMiss(String),
    #[error("corrupt log entry at byte {offset}: {message}")]
    LogCorrupt { offset: u64, message: String },
    #[error("invalid backend spec {0:?}")]
    InvalidSpec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub prompt: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub n_samples: u32,
    #[serde(default)]
    pub stop_sequences: Vec<String>,
    /// Correlation string; not part of the content hash.
    #[serde(default)]
    pub tag: String,
}

impl GenerationRequest {
    /// Greedy single-sample request.
    pub fn new(prompt: impl Into<String>) -> Self {
        GenerationRequest {
            prompt: prompt.into(),
            temperature: 0.0,
            max_tokens: DEFAULT_MAX_TOKENS,
            n_samples: 1,
            stop_sequences: Vec::new(),
            tag: String::new(),
        }
    }

    pub fn with_sampling(mut self, n_samples: u32, temperature: f64) -> Self {
        self.n_samples = n_samples.max(1);
        self.temperature = temperature.max(0.0);
        self
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }

    /// Hex SHA-256 over (prompt, temperature, n_samples, max_tokens), the replay key.
    pub fn content_hash(&self) -> String {
        let key = serde_json::to_vec(&(&self.prompt, self.temperature, self.n_samples, self.max_tokens))
            .expect("tuple serialization is infallible");
        hex::encode(Sha256::digest(&key))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub request: GenerationRequest,
    pub outputs: Vec<String>,
    pub backend_id: String,
    /// Milliseconds since the Unix epoch.
    pub timestamp_ms: u64,
    pub latency_ms: u64,
}

impl GenerationRecord {
    pub fn new(request: &GenerationRequest, outputs: Vec<String>, backend_id: &str, latency: Duration) -> Self {
        GenerationRecord {
            request: request.clone(),
            outputs,
            backend_id: backend_id.to_string(),
            timestamp_ms: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_millis() as u64)
                .unwrap_or(0),
            latency_ms: latency.as_millis() as u64,
        }
    }
}

/// A text-generation backend, shareable across pipeline workers.
pub trait Backend: Send + Sync {
    fn id(&self) -> &str;

    /// Returns all `request.n_samples` completions.
    fn generate(&self, request: &GenerationRequest) -> Result<GenerationRecord, GenerationError>;
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationRecord, GenerationError> {
        (**self).generate(request)
    }
}

impl<B: Backend + ?Sized> Backend for std::sync::Arc<B> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationRecord, GenerationError> {
        (**self).generate(request)
    }
}

impl<B: Backend + ?Sized> Backend for &B {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationRecord, GenerationError> {
        (**self).generate(request)
    }
}
