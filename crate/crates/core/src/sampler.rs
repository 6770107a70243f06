//! Supervised fine-tuning export and reward-filtered data augmentation.
//!
//! [`export_sft_dataset`] turns every gold dialogue into a prompt/completion
//! pair. [`rejection_sample`] draws K candidates per training prompt from a
//! backend, scores each with [`classify_errors`], keeps the distinct
//! candidates whose reward is strictly positive and emits them next to the
//! untouched gold examples.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::map_bounded;
use crate::generation::limit::DEFAULT_IN_FLIGHT;
use crate::generation::{Backend, GenerationError, GenerationRequest, DEFAULT_MAX_TOKENS};
use crate::parser::{extract_argument_map, serialize_argument_map, KeyOrder};
use crate::prompting::{PromptBuilder, PromptError};
use crate::schema::{ApiSchema, Dialogue, SchemaCatalog};
use crate::scoring::{classify_errors, ScoringError};

pub const DEFAULT_K: u32 = 4;
pub const DEFAULT_TEMPERATURE: f64 = 0.8;

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("dialogue {dialogue:?}: {source}")]
    GoldSchemaMismatch {
        dialogue: String,
        #[source]
        source: ScoringError,
    },
    #[error("dialogue {dialogue:?} targets unknown api {api:?}")]
    UnknownApi { dialogue: String, api: String },
    #[error("dialogue {dialogue:?}: {source}")]
    Prompt {
        dialogue: String,
        #[source]
        source: PromptError,
    },
    #[error("dialogue {dialogue:?}: {source}")]
    Backend {
        dialogue: String,
        #[source]
        source: GenerationError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExampleSource {
    Gold,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub prompt: String,
    pub completion: String,
    pub source: ExampleSource,
    pub reward: f64,
    pub dialogue_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub k: u32,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Abort on the first backend failure instead of skipping the dialogue.
    pub strict: bool,
    /// Dialogues processed concurrently.
    pub workers: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            k: DEFAULT_K,
            temperature: DEFAULT_TEMPERATURE,
            max_tokens: DEFAULT_MAX_TOKENS,
            strict: false,
            workers: DEFAULT_IN_FLIGHT,
        }
    }
}

impl SamplerConfig {
    /// The request issued for one training prompt.
    pub fn request(&self, prompt: &str, dialogue_id: &str) -> GenerationRequest {
        let mut request = GenerationRequest::new(prompt)
            .with_sampling(self.k, self.temperature)
            .with_tag(dialogue_id);
        request.max_tokens = self.max_tokens;
        request
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SamplerStats {
    pub dialogues: usize,
    pub generated: usize,
    pub parse_failed: usize,
    /// Parsed candidates with reward <= 0.
    pub rejected: usize,
    /// Positive-reward candidates dropped as duplicates within their dialogue.
    pub duplicates: usize,
    pub kept: usize,
    pub mean_kept_reward: f64,
    pub skipped_dialogues: Vec<String>,
}

fn schema_for<'a>(catalog: &'a SchemaCatalog, dialogue: &Dialogue) -> Result<&'a ApiSchema, SamplerError> {
    catalog
        .get(&dialogue.target_api)
        .ok_or_else(|| SamplerError::UnknownApi {
            dialogue: dialogue.id.clone(),
            api: dialogue.target_api.clone(),
        })
}

fn gold_example(
    dialogue: &Dialogue,
    catalog: &SchemaCatalog,
    prompts: &PromptBuilder,
) -> Result<TrainingExample, SamplerError> {
    let schema = schema_for(catalog, dialogue)?;
    classify_errors(&dialogue.gold_arguments, &dialogue.gold_arguments, schema).map_err(|source| {
        SamplerError::GoldSchemaMismatch {
            dialogue: dialogue.id.clone(),
            source,
        }
    })?;
    let prompt = prompts
        .build_default_prompt(schema, dialogue)
        .map_err(|source| SamplerError::Prompt {
            dialogue: dialogue.id.clone(),
            source,
        })?;
    Ok(TrainingExample {
        prompt: prompt.text,
        completion: serialize_argument_map(&dialogue.gold_arguments.in_schema_order(schema), KeyOrder::Given),
        source: ExampleSource::Gold,
        reward: 1.0,
        dialogue_id: dialogue.id.clone(),
    })
}

/// One gold example per dialogue, completions in schema order.
pub fn export_sft_dataset(
    dialogues: &[Dialogue],
    catalog: &SchemaCatalog,
    prompts: &PromptBuilder,
) -> Result<Vec<TrainingExample>, SamplerError> {
    dialogues.iter().map(|d| gold_example(d, catalog, prompts)).collect()
}

#[derive(Default)]
struct DialogueTally {
    generated: usize,
    parse_failed: usize,
    rejected: usize,
    duplicates: usize,
}

struct DialogueResult {
    gold: TrainingExample,
    kept: Vec<TrainingExample>,
    tally: DialogueTally,
    skipped: Option<GenerationError>,
}

fn sample_dialogue(
    backend: &dyn Backend,
    dialogue: &Dialogue,
    catalog: &SchemaCatalog,
    prompts: &PromptBuilder,
    config: &SamplerConfig,
) -> Result<DialogueResult, SamplerError> {
    let gold = gold_example(dialogue, catalog, prompts)?;
    let schema = schema_for(catalog, dialogue)?;
    let mut result = DialogueResult {
        kept: Vec::new(),
        tally: DialogueTally::default(),
        skipped: None,
        gold,
    };
    let record = match backend.generate(&config.request(&result.gold.prompt, &dialogue.id)) {
        Ok(r) => r,
        Err(e) => {
            result.skipped = Some(e);
            return Ok(result);
        }
    };

    let mut seen = HashSet::new();
    for raw in &record.outputs {
        result.tally.generated += 1;
        let Ok(parsed) = extract_argument_map(raw) else {
            result.tally.parse_failed += 1;
            continue;
        };
        let breakdown = classify_errors(&parsed.map, &dialogue.gold_arguments, schema).map_err(|source| {
            SamplerError::GoldSchemaMismatch {
                dialogue: dialogue.id.clone(),
                source,
            }
        })?;
        if breakdown.reward <= 0.0 {
            result.tally.rejected += 1;
            continue;
        }
        if !seen.insert(serialize_argument_map(&parsed.map, KeyOrder::Sorted)) {
            result.tally.duplicates += 1;
            continue;
        }
        result.kept.push(TrainingExample {
            prompt: result.gold.prompt.clone(),
            completion: serialize_argument_map(&parsed.map, KeyOrder::Given),
            source: ExampleSource::Sampled,
            reward: breakdown.reward,
            dialogue_id: dialogue.id.clone(),
        });
    }
    Ok(result)
}

/// Gold examples plus reward-filtered model samples, in input dialogue order
/// (each gold example followed by the samples kept for it).
pub fn rejection_sample(
    backend: &dyn Backend,
    dialogues: &[Dialogue],
    catalog: &SchemaCatalog,
    prompts: &PromptBuilder,
    config: &SamplerConfig,
) -> Result<(Vec<TrainingExample>, SamplerStats), SamplerError> {
    let results = map_bounded(dialogues, config.workers, |d| {
        sample_dialogue(backend, d, catalog, prompts, config)
    });

    let mut augmented = Vec::with_capacity(dialogues.len() * 2);
    let mut stats = SamplerStats {
        dialogues: dialogues.len(),
        ..Default::default()
    };
    let mut reward_sum = 0.0;
    for (dialogue, result) in dialogues.iter().zip(results) {
        let result = result?;
        if let Some(source) = result.skipped {
            if config.strict {
                return Err(SamplerError::Backend {
                    dialogue: dialogue.id.clone(),
                    source,
                });
            }
            log::warn!("skipping dialogue {}: {source}", dialogue.id);
            stats.skipped_dialogues.push(dialogue.id.clone());
        }
        stats.generated += result.tally.generated;
        stats.parse_failed += result.tally.parse_failed;
        stats.rejected += result.tally.rejected;
        stats.duplicates += result.tally.duplicates;
        stats.kept += result.kept.len();
        reward_sum += result.kept.iter().map(|e| e.reward).sum::<f64>();
        augmented.push(result.gold);
        augmented.extend(result.kept);
    }
    if stats.kept > 0 {
        stats.mean_kept_reward = reward_sum / stats.kept as f64;
    }
    Ok((augmented, stats))
}

pub fn examples_to_jsonl(examples: &[TrainingExample]) -> String {
    let mut out = String::new();
    for e in examples {
        out.push_str(&serde_json::to_string(e).expect("example serialization is infallible"));
        out.push('\n');
    }
    out
}
