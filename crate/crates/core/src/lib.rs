//! Grounding, scoring and curation of LLM outputs for API argument filling.
//!
//! The pipeline pieces, bottom-up:
//!
//! * [`schema`]: API schemas, dialogues, argument maps and canonical forms.
//! * [`parser`]: relaxed extraction of argument dictionaries from model text.
//! * [`scoring`]: NK/MK/SV/HV error classification and the sample reward.
//! * [`metrics`] and [`report`]: BLEU, fuzzy match, character F1, error rates.
//! * [`prompting`]: default and per-slot prompts, multi-step filling.
//! * [`generation`]: live, scripted and record/replay backends.
//! * [`sampler`]: SFT export and reward-filtered augmentation.
//! * [`split`] and [`ingest`]: dataset splits and external dataset conversion.

pub mod exec;
pub mod generation;
pub mod ingest;
pub mod metrics;
pub mod parser;
pub mod prompting;
pub mod report;
pub mod sampler;
pub mod schema;
pub mod scoring;
pub mod similarity;
pub mod split;

pub use exec::Execution;
pub use generation::{Backend, BackendSpec, GenerationError, GenerationRecord, GenerationRequest};
pub use metrics::{evaluate_corpus, MetricsReport};
pub use parser::{extract_argument_map, serialize_argument_map, KeyOrder, ParseError, ParseOutcome};
pub use prompting::{run_multistep, PromptBuilder, PromptBundle};
pub use report::PredictionRecord;
pub use sampler::{rejection_sample, SamplerConfig, TrainingExample};
pub use schema::{ApiSchema, ArgumentMap, Dialogue, SchemaCatalog, SlotKind, SlotSpec};
pub use scoring::{classify_errors, reward_of, ErrorBreakdown, Verdict};
