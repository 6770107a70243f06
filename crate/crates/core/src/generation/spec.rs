use std::fmt;
use std::fs::OpenOptions;
use std::path::PathBuf;
use std::str::FromStr;

use super::{
    open_replay, record_session, Backend, GenerationError, HttpBackend, HttpConfig, InFlightLimit, ScriptedBackend,
};

/// Backend selector: `http:<profile>`, `mock:<script>`, `replay:<log>` or
/// `record:<log>` (records a live `http:default` session).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendSpec {
    Http(String),
    Mock(PathBuf),
    Replay(PathBuf),
    Record(PathBuf),
}

impl FromStr for BackendSpec {
    type Err = GenerationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| GenerationError::InvalidSpec(s.to_string()))?;
        if arg.is_empty() && kind != "http" {
            return Err(GenerationError::InvalidSpec(s.to_string()));
        }
        match kind {
            "http" => Ok(BackendSpec::Http(if arg.is_empty() {
                "default".into()
            } else {
                arg.into()
            })),
            "mock" => Ok(BackendSpec::Mock(arg.into())),
            "replay" => Ok(BackendSpec::Replay(arg.into())),
            "record" => Ok(BackendSpec::Record(arg.into())),
            _ => Err(GenerationError::InvalidSpec(s.to_string())),
        }
    }
}

impl fmt::Display for BackendSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendSpec::Http(p) => write!(f, "http:{p}"),
            BackendSpec::Mock(p) => write!(f, "mock:{}", p.display()),
            BackendSpec::Replay(p) => write!(f, "replay:{}", p.display()),
            BackendSpec::Record(p) => write!(f, "record:{}", p.display()),
        }
    }
}

impl BackendSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            BackendSpec::Http(_) => "http",
            BackendSpec::Mock(_) => "mock",
            BackendSpec::Replay(_) => "replay",
            BackendSpec::Record(_) => "record",
        }
    }

    /// Files the backend reads, for run metadata.
    pub fn input_file(&self) -> Option<&PathBuf> {
        match self {
            BackendSpec::Mock(p) | BackendSpec::Replay(p) => Some(p),
            _ => None,
        }
    }

    /// Instantiates the backend behind an in-flight limit.
    pub fn build(&self, max_in_flight: usize) -> Result<Box<dyn Backend>, GenerationError> {
        Ok(match self {
            BackendSpec::Http(profile) => Box::new(InFlightLimit::new(
                HttpBackend::new(HttpConfig::from_env(profile))?,
                max_in_flight,
            )),
            BackendSpec::Mock(path) => {
                let text = std::fs::read_to_string(path)?;
                Box::new(InFlightLimit::new(ScriptedBackend::from_script(&text)?, max_in_flight))
            }
            BackendSpec::Replay(path) => Box::new(InFlightLimit::new(
                open_replay(std::fs::File::open(path)?)?,
                max_in_flight,
            )),
            BackendSpec::Record(path) => {
                let sink = OpenOptions::new().create(true).append(true).open(path)?;
                let live = HttpBackend::new(HttpConfig::from_env("default"))?;
                Box::new(InFlightLimit::new(record_session(live, Box::new(sink)), max_in_flight))
            }
        })
    }
}
