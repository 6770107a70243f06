//! Chat-completion HTTP backend.

use std::time::{Duration, Instant};

use serde_json::{json, Value};

use super::{Backend, GenerationError, GenerationRecord, GenerationRequest};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);
pub const DEFAULT_MAX_RETRIES: u32 = 3;
pub const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";

#[derive(Debug, Clone, PartialEq)]
pub struct HttpConfig {
    pub base_url: String,
    pub api_key: Option<String>,
    pub model: String,
    pub timeout: Duration,
    pub max_retries: u32,
    /// First retry delay; doubles on every further attempt.
    pub retry_backoff: Duration,
}

impl Default for HttpConfig {
    fn default() -> Self {
        HttpConfig {
            base_url: DEFAULT_BASE_URL.to_string(),
            api_key: None,
            model: "gpt-3.5-turbo".to_string(),
            timeout: DEFAULT_TIMEOUT,
            max_retries: DEFAULT_MAX_RETRIES,
            retry_backoff: Duration::from_millis(500),
        }
    }
}

impl HttpConfig {
    /// Reads `ARGROUND_API_KEY`, `ARGROUND_BASE_URL` and `ARGROUND_MODEL`.
    /// A profile other than `default` first looks for
    /// `ARGROUND_<PROFILE>_API_KEY` etc. and falls back to the plain names.
    pub fn from_env(profile: &str) -> Self {
        Self::from_lookup(profile, |name| std::env::var(name).ok())
    }

    pub fn from_lookup(profile: &str, lookup: impl Fn(&str) -> Option<String>) -> Self {
        let prefix = match profile {
            "" | "default" => None,
            p => Some(format!(
                "ARGROUND_{}_",
                p.to_uppercase().replace(|c: char| !c.is_ascii_alphanumeric(), "_")
            )),
        };
        let get = |suffix: &str| {
            prefix
                .as_ref()
                .and_then(|p| lookup(&format!("{p}{suffix}")))
                .or_else(|| lookup(&format!("ARGROUND_{suffix}")))
                .filter(|v| !v.is_empty())
        };
        let defaults = HttpConfig::default();
        HttpConfig {
            base_url: get("BASE_URL").unwrap_or(defaults.base_url),
            api_key: get("API_KEY"),
            model: get("MODEL").unwrap_or(defaults.model),
            ..defaults
        }
    }
}

pub struct HttpBackend {
    config: HttpConfig,
    client: reqwest::blocking::Client,
    id: String,
}

enum Attempt {
    Done(Vec<String>),
    Retry(String),
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Result<Self, GenerationError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| GenerationError::Backend(e.to_string()))?;
        let id = format!("http:{}", config.model);
        Ok(HttpBackend { config, client, id })
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }

    fn body(&self, request: &GenerationRequest, n: u32) -> Value {
        let mut body = json!({
            "model": self.config.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "n": n,
            "max_tokens": request.max_tokens,
        });
        if !request.stop_sequences.is_empty() {
            body["stop"] = json!(request.stop_sequences);
        }
        body
    }

    fn attempt(&self, request: &GenerationRequest, n: u32) -> Result<Attempt, GenerationError> {
        let mut call = self.client.post(self.endpoint()).json(&self.body(request, n));
        if let Some(key) = &self.config.api_key {
            call = call.bearer_auth(key);
        }
        let response = match call.send() {
            Ok(r) => r,
            Err(e) => return Ok(Attempt::Retry(e.to_string())),
        };
        let status = response.status();
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(GenerationError::Auth(format!("HTTP {status}")));
        }
        if status.as_u16() == 408 || status.as_u16() == 429 || status.is_server_error() {
            return Ok(Attempt::Retry(format!("HTTP {status}")));
        }
        if !status.is_success() {
            let text = response.text().unwrap_or_default();
            return Err(GenerationError::Backend(format!("HTTP {status}: {text}")));
        }
        let payload: Value = match response.json() {
            Ok(v) => v,
            Err(e) => return Ok(Attempt::Retry(format!("unreadable response body: {e}"))),
        };
        let choices = payload["choices"]
            .as_array()
            .ok_or_else(|| GenerationError::Backend("response has no choices".into()))?;
        let outputs = choices
            .iter()
            .map(|c| {
                c["message"]["content"]
                    .as_str()
                    .or_else(|| c["text"].as_str())
                    .unwrap_or_default()
                    .to_string()
            })
            .collect();
        Ok(Attempt::Done(outputs))
    }

    /// One completion batch with retries and exponential backoff.
    fn complete(&self, request: &GenerationRequest, n: u32) -> Result<Vec<String>, GenerationError> {
        let mut last = String::new();
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                let delay = self.config.retry_backoff * 2u32.saturating_pow(attempt - 1);
                log::debug!("retrying after {delay:?}: {last}");
                std::thread::sleep(delay);
            }
            match self.attempt(request, n)? {
                Attempt::Done(outputs) => return Ok(outputs),
                Attempt::Retry(reason) => last = reason,
            }
        }
        Err(GenerationError::Backend(format!(
            "gave up after {} retries: {last}",
            self.config.max_retries
        )))
    }
}

impl Backend for HttpBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationRecord, GenerationError> {
        let started = Instant::now();
        let want = request.n_samples.max(1) as usize;
        let mut outputs = Vec::with_capacity(want);
        // some servers ignore `n`; keep asking for the remainder
        for _ in 0..want {
            let missing = (want - outputs.len()) as u32;
            let batch = self.complete(request, missing)?;
            if batch.is_empty() {
                return Err(GenerationError::Backend("server returned no completions".into()));
            }
            outputs.extend(batch);
            if outputs.len() >= want {
                break;
            }
        }
        if outputs.len() < want {
            return Err(GenerationError::Backend(format!(
                "wanted {want} completions, got {}",
                outputs.len()
            )));
        }
        outputs.truncate(want);
        Ok(GenerationRecord::new(request, outputs, &self.id, started.elapsed()))
    }
}
