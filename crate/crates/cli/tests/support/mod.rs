//! Synthetic corpora and a thin runner around the `arground` binary.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use arground_core::generation::GenerationRecord;
use arground_core::schema::{load_schema_catalog, ArgumentMap, Dialogue, DialogueTurn, SchemaCatalog, Speaker};
use arground_core::{GenerationRequest, PromptBuilder, SamplerConfig};

pub const SCHEMAS: &str = r#"[
  {"api_name": "hair_appointment", "description": "Book a haircut",
   "slots": [
     {"name": "name", "kind": "free-text", "description": "customer name"},
     {"name": "time", "kind": "time", "description": "appointment time"},
     {"name": "stylist", "kind": "categorical", "description": "preferred stylist", "allowed_values": ["jess", "jack"], "required": false}
   ]},
  {"api_name": "book_flight", "description": "Reserve a seat on a flight",
   "slots": [
     {"name": "destination", "kind": "free-text", "description": "arrival city"},
     {"name": "date", "kind": "date", "description": "departure date"},
     {"name": "passengers", "kind": "integer", "description": "number of travellers"}
   ]}
]"#;

pub const NAMES: [&str; 8] = ["john", "maria", "ahmed", "lucia", "kofi", "mei", "olga", "ravi"];
pub const TIMES: [&str; 6] = ["3pm", "10am", "4:30pm", "9:15am", "11am", "2pm"];

pub fn catalog() -> SchemaCatalog {
    load_schema_catalog(SCHEMAS.as_bytes()).unwrap()
}

pub fn turn(speaker: Speaker, text: &str) -> DialogueTurn {
    DialogueTurn {
        speaker,
        utterance: text.into(),
    }
}

/// Haircut booking with gold `{name, time}`.
pub fn haircut(id: &str, domain: &str, name: &str, time: &str) -> Dialogue {
    Dialogue {
        id: id.into(),
        domain: domain.into(),
        target_api: "hair_appointment".into(),
        turns: vec![
            turn(Speaker::User, "hi, i would like a haircut"),
            turn(Speaker::Agent, "sure, what name should i put it under?"),
            turn(Speaker::User, &format!("{name}, and {time} works for me")),
        ],
        gold_arguments: ArgumentMap::from_pairs([("name", name), ("time", time)]).unwrap(),
    }
}

pub fn haircut_corpus(n: usize) -> Vec<Dialogue> {
    (0..n)
        .map(|i| {
            haircut(
                &format!("hair-{i:03}"),
                "salon",
                NAMES[i % NAMES.len()],
                TIMES[i % TIMES.len()],
            )
        })
        .collect()
}

pub fn to_jsonl<T: serde::Serialize>(items: &[T]) -> String {
    items.iter().map(|x| serde_json::to_string(x).unwrap() + "\n").collect()
}

/// Replay log answering the `reject-sample` request of each dialogue with
/// the given candidate outputs.
pub fn sampling_log(
    dialogues: &[Dialogue],
    config: &SamplerConfig,
    candidates: impl Fn(&Dialogue) -> Vec<String>,
) -> String {
    let catalog = catalog();
    let prompts = PromptBuilder::default();
    let records: Vec<GenerationRecord> = dialogues
        .iter()
        .map(|d| {
            let prompt = prompts.build_default_prompt(&catalog[&d.target_api], d).unwrap().text;
            let request = config.request(&prompt, &d.id);
            GenerationRecord {
                request,
                outputs: candidates(d),
                backend_id: "recorded".into(),
                timestamp_ms: 1_700_000_000_000,
                latency_ms: 12,
            }
        })
        .collect();
    to_jsonl(&records)
}

/// Replay log answering the greedy default-mode `fill` request.
pub fn fill_log(dialogues: &[Dialogue], answer: impl Fn(&Dialogue) -> String) -> String {
    let catalog = catalog();
    let prompts = PromptBuilder::default();
    let records: Vec<GenerationRecord> = dialogues
        .iter()
        .map(|d| {
            let prompt = prompts.build_default_prompt(&catalog[&d.target_api], d).unwrap().text;
            GenerationRecord {
                request: GenerationRequest::new(prompt).with_tag(d.id.clone()),
                outputs: vec![answer(d)],
                backend_id: "recorded".into(),
                timestamp_ms: 1_700_000_000_000,
                latency_ms: 12,
            }
        })
        .collect();
    to_jsonl(&records)
}

pub struct Workspace {
    pub dir: tempfile::TempDir,
}

impl Workspace {
    pub fn new() -> Self {
        Workspace {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn write(&self, name: &str, contents: &str) -> PathBuf {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).unwrap();
        }
        std::fs::write(&path, contents).unwrap();
        path
    }

    pub fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.path(name)).unwrap()
    }

    /// Runs the binary with the workspace as working directory.
    pub fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_arground"))
            .args(args)
            .current_dir(self.dir.path())
            .env("RUST_LOG", "error")
            .output()
            .unwrap()
    }

    /// Runs and asserts success.
    pub fn ok(&self, args: &[&str]) -> Output {
        let out = self.run(args);
        assert!(
            out.status.success(),
            "arground {args:?} failed with {:?}\n{}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        );
        out
    }
}

pub fn file_names(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}
