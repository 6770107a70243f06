//! Prompt construction and the one-slot-at-a-time prompting protocol.
//!
//! Templates are plain text with `{{instruction}}`, `{{api_block}}`,
//! `{{history}}` and `{{slot_hint}}` placeholders. The shipped templates are
//! versioned files under `templates/`; their hash goes into run metadata.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::generation::{Backend, GenerationError, GenerationRecord, GenerationRequest, DEFAULT_MAX_TOKENS};
use crate::schema::{canonicalize_value, ApiSchema, ArgumentMap, Dialogue, SlotKind, SlotSpec, Speaker};

pub const TEMPLATE_VERSION: &str = "v1";
pub const DEFAULT_TEMPLATE: &str = include_str!("../templates/default_v1.txt");
pub const SLOT_TEMPLATE: &str = include_str!("../templates/slot_v1.txt");

pub const DEFAULT_INSTRUCTION: &str = "Fill in the arguments of the API call using the dialogue history. \
Respond with a flat dictionary of argument names and values, for example {\"argument\": \"value\"}. \
Use only the arguments listed for the API and leave out any argument the dialogue does not provide.";

pub const SLOT_INSTRUCTION: &str =
    "Find the value of the single API argument described below in the dialogue history. \
Respond with the value on one line, or NONE if the dialogue does not provide it.";

pub const NONE_SENTINEL: &str = "none";

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("dialogue {dialogue:?} targets {found:?} but schema is {expected:?}")]
    ApiMismatch {
        dialogue: String,
        expected: String,
        found: String,
    },
    #[error("slot {slot:?} is not part of api {api:?}")]
    UnknownSlot { api: String, slot: String },
    #[error("slot response has no non-empty line")]
    EmptySlotResponse,
    #[error("backend failed on slot {slot:?}: {source}")]
    Backend {
        slot: String,
        #[source]
        source: GenerationError,
    },
    #[error("template is missing placeholder {{{{{0}}}}}")]
    TemplateInvalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptMode {
    Default,
    Slot,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptBundle {
    pub text: String,
    pub schema_ref: String,
    pub dialogue_ref: String,
    pub mode: PromptMode,
    /// Present iff `mode` is `Slot`.
    pub slot_name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptBuilder {
    default_template: String,
    slot_template: String,
}

impl Default for PromptBuilder {
    fn default() -> Self {
        PromptBuilder {
            default_template: DEFAULT_TEMPLATE.to_string(),
            slot_template: SLOT_TEMPLATE.to_string(),
        }
    }
}

fn require(template: &str, names: &[&str]) -> Result<(), PromptError> {
    for name in names {
        if !template.contains(&format!("{{{{{name}}}}}")) {
            return Err(PromptError::TemplateInvalid(name.to_string()));
        }
    }
    Ok(())
}

/// Single-pass placeholder substitution; text inserted for one placeholder is
/// never rescanned, and unknown placeholders are left as they are.
fn render(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len() * 2);
    let mut rest = template;
    while let Some(open) = rest.find("{{") {
        out.push_str(&rest[..open]);
        let after = &rest[open + 2..];
        match after.find("}}") {
            Some(close) => {
                let name = &after[..close];
                match values.iter().find(|(n, _)| *n == name) {
                    Some((_, v)) => out.push_str(v),
                    None => out.push_str(&rest[open..open + 2 + close + 2]),
                }
                rest = &after[close + 2..];
            }
            None => {
                out.push_str(&rest[open..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out.trim_end().to_string()
}

fn slot_line(slot: &SlotSpec) -> String {
    let mut line = format!("- {} ({}): {}", slot.name, slot.kind, slot.description);
    if let Some(allowed) = &slot.allowed_values {
        let _ = write!(line, " [allowed: {}]", allowed.join(" | "));
    }
    line
}

fn api_block(schema: &ApiSchema) -> String {
    let mut block = format!("API: {}\nDescription: {}\nSlots:", schema.api_name, schema.description);
    for slot in &schema.slots {
        block.push('\n');
        block.push_str(&slot_line(slot));
    }
    block
}

fn history(dialogue: &Dialogue) -> String {
    dialogue
        .turns
        .iter()
        .map(|t| {
            let speaker = match t.speaker {
                Speaker::User => "User",
                Speaker::Agent => "Agent",
            };
            // one line per turn
            let utterance = t.utterance.split_whitespace().collect::<Vec<_>>().join(" ");
            format!("{speaker}: {utterance}")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn slot_hint(slot: &SlotSpec) -> String {
    let mut hint = format!(
        "Argument: {}\nType: {}\nDescription: {}",
        slot.name, slot.kind, slot.description
    );
    if slot.kind == SlotKind::Categorical {
        if let Some(allowed) = &slot.allowed_values {
            let _ = write!(hint, "\nAllowed values: {}", allowed.join(" | "));
        }
    }
    hint
}

impl PromptBuilder {
    pub fn new(default_template: &str, slot_template: &str) -> Result<Self, PromptError> {
        require(default_template, &["instruction", "api_block", "history"])?;
        require(slot_template, &["instruction", "history", "slot_hint"])?;
        Ok(PromptBuilder {
            default_template: default_template.to_string(),
            slot_template: slot_template.to_string(),
        })
    }

    /// Hex SHA-256 over both templates and the fixed instructions.
    pub fn template_hash(&self) -> String {
        let mut h = Sha256::new();
        for part in [
            self.default_template.as_str(),
            self.slot_template.as_str(),
            DEFAULT_INSTRUCTION,
            SLOT_INSTRUCTION,
        ] {
            h.update(part.as_bytes());
            h.update([0u8]);
        }
        hex::encode(h.finalize())
    }

    pub fn build_default_prompt(&self, schema: &ApiSchema, dialogue: &Dialogue) -> Result<PromptBundle, PromptError> {
        check_api(schema, dialogue)?;
        let text = render(
            &self.default_template,
            &[
                ("instruction", DEFAULT_INSTRUCTION),
                ("api_block", &api_block(schema)),
                ("history", &history(dialogue)),
            ],
        );
        Ok(PromptBundle {
            text,
            schema_ref: schema.api_name.clone(),
            dialogue_ref: dialogue.id.clone(),
            mode: PromptMode::Default,
            slot_name: None,
        })
    }

    pub fn build_slot_prompt(
        &self,
        schema: &ApiSchema,
        dialogue: &Dialogue,
        slot: &SlotSpec,
    ) -> Result<PromptBundle, PromptError> {
        check_api(schema, dialogue)?;
        if schema.slot(&slot.name) != Some(slot) {
            return Err(PromptError::UnknownSlot {
                api: schema.api_name.clone(),
                slot: slot.name.clone(),
            });
        }
        let text = render(
            &self.slot_template,
            &[
                ("instruction", SLOT_INSTRUCTION),
                ("history", &history(dialogue)),
                ("slot_hint", &slot_hint(slot)),
            ],
        );
        Ok(PromptBundle {
            text,
            schema_ref: schema.api_name.clone(),
            dialogue_ref: dialogue.id.clone(),
            mode: PromptMode::Slot,
            slot_name: Some(slot.name.clone()),
        })
    }
}

fn check_api(schema: &ApiSchema, dialogue: &Dialogue) -> Result<(), PromptError> {
    if dialogue.target_api != schema.api_name {
        return Err(PromptError::ApiMismatch {
            dialogue: dialogue.id.clone(),
            expected: schema.api_name.clone(),
            found: dialogue.target_api.clone(),
        });
    }
    Ok(())
}

/// First non-empty line, outer quotes stripped when the whole line is quoted,
/// canonicalized. `NONE` (any case) means the slot is not fillable.
pub fn parse_slot_response(raw: &str) -> Result<Option<String>, PromptError> {
    let line = raw
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .ok_or(PromptError::EmptySlotResponse)?;
    let unquoted = ['"', '\'', '`']
        .iter()
        .find_map(|q| {
            line.strip_prefix(*q)
                .and_then(|s| s.strip_suffix(*q))
                .filter(|inner| !inner.contains(*q))
        })
        .unwrap_or(line);
    let value = canonicalize_value(unquoted);
    if value.is_empty() {
        return Err(PromptError::EmptySlotResponse);
    }
    if value == NONE_SENTINEL {
        return Ok(None);
    }
    Ok(Some(value))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiStepOutcome {
    pub map: ArgumentMap,
    pub transcript: Vec<GenerationRecord>,
    pub warnings: Vec<String>,
}

/// Prompts for each slot in schema order, one independent request per slot.
pub fn run_multistep(
    backend: &dyn Backend,
    prompts: &PromptBuilder,
    schema: &ApiSchema,
    dialogue: &Dialogue,
) -> Result<MultiStepOutcome, PromptError> {
    let mut outcome = MultiStepOutcome {
        map: ArgumentMap::new(),
        transcript: Vec::with_capacity(schema.slots.len()),
        warnings: Vec::new(),
    };
    for slot in &schema.slots {
        let bundle = prompts.build_slot_prompt(schema, dialogue, slot)?;
        let mut request = GenerationRequest::new(bundle.text).with_tag(format!("{}/{}", dialogue.id, slot.name));
        request.max_tokens = DEFAULT_MAX_TOKENS;
        let record = backend.generate(&request).map_err(|source| PromptError::Backend {
            slot: slot.name.clone(),
            source,
        })?;
        match record.outputs.first().map(|raw| parse_slot_response(raw)) {
            Some(Ok(Some(value))) => {
                outcome
                    .map
                    .insert(&slot.name, &value)
                    .expect("slot names are unique canonical keys");
            }
            Some(Ok(None)) => {}
            Some(Err(_)) | None => outcome.warnings.push(format!("empty response for slot {}", slot.name)),
        }
        outcome.transcript.push(record);
    }
    Ok(outcome)
}
