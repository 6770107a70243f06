//! Error classification and the rejection-sampling reward.
//!
//! Each predicted entry is classified against the API schema and the gold
//! arguments:
//!
//! * key not in the schema: non-existent key (NK), value ignored;
//! * key in schema and gold: correct when the values fuzzy-match, otherwise
//!   a schema-grounded wrong value (SV) if the value conforms to the slot's
//!   kind, else a hallucinated value (HV);
//! * key in schema but not in gold: one SV or HV error by the same rule.
//!
//! Every gold key missing from the prediction is one missing-key (MK) error.
//! The reward is `1 - 2 * n_error / n_total` where `n_total` counts gold keys
//! and values, clamped to `[-1, 1]`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schema::{value_conforms_to_slot, ApiSchema, ArgumentMap};
pub use crate::similarity::values_match;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoringError {
    #[error("gold key {key:?} is not a slot of api {api:?}")]
    GoldSchemaMismatch { api: String, key: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "correct")]
    Correct,
    NK,
    MK,
    SV,
    HV,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Correct => "correct",
            Verdict::NK => "NK",
            Verdict::MK => "MK",
            Verdict::SV => "SV",
            Verdict::HV => "HV",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBreakdown {
    pub n_nk: usize,
    pub n_mk: usize,
    pub n_sv: usize,
    pub n_hv: usize,
    pub n_total: usize,
    pub n_error: usize,
    pub reward: f64,
    /// Schema slots in declaration order, then non-schema keys sorted.
    #[serde(rename = "verdicts")]
    pub per_slot_verdicts: Vec<(String, Verdict)>,
}

impl ErrorBreakdown {
    /// Builds a breakdown from raw counts, deriving `n_error` and the reward.
    pub fn from_counts(n_nk: usize, n_mk: usize, n_sv: usize, n_hv: usize, n_total: usize) -> Self {
        let mut b = ErrorBreakdown {
            n_nk,
            n_mk,
            n_sv,
            n_hv,
            n_total,
            n_error: n_nk + n_mk + n_sv + n_hv,
            reward: 0.0,
            per_slot_verdicts: Vec::new(),
        };
        b.reward = reward_of(&b);
        b
    }

    pub fn is_consistent(&self) -> bool {
        self.n_error == self.n_nk + self.n_mk + self.n_sv + self.n_hv
    }
}

pub fn reward_of(breakdown: &ErrorBreakdown) -> f64 {
    if breakdown.n_total == 0 {
        return if breakdown.n_error == 0 { 1.0 } else { -1.0 };
    }
    let raw = 1.0 - 2.0 * breakdown.n_error as f64 / breakdown.n_total as f64;
    raw.clamp(-1.0, 1.0)
}

pub fn classify_errors(
    pred: &ArgumentMap,
    gold: &ArgumentMap,
    schema: &ApiSchema,
) -> Result<ErrorBreakdown, ScoringError> {
    if let Some(key) = gold.keys().find(|k| schema.slot(k).is_none()) {
        return Err(ScoringError::GoldSchemaMismatch {
            api: schema.api_name.clone(),
            key: key.to_string(),
        });
    }

    let mut verdicts = Vec::with_capacity(schema.slots.len());
    let (mut n_mk, mut n_sv, mut n_hv) = (0, 0, 0);
    for slot in &schema.slots {
        let verdict = match (pred.get(&slot.name), gold.get(&slot.name)) {
            (None, None) => continue,
            (None, Some(_)) => Verdict::MK,
            (Some(p), Some(g)) if values_match(p, g) => Verdict::Correct,
            (Some(p), _) if value_conforms_to_slot(slot, p) => Verdict::SV,
            (Some(_), _) => Verdict::HV,
        };
        match verdict {
            Verdict::MK => n_mk += 1,
            Verdict::SV => n_sv += 1,
            Verdict::HV => n_hv += 1,
            _ => {}
        }
        verdicts.push((slot.name.clone(), verdict));
    }

    let mut unknown: Vec<&str> = pred.keys().filter(|k| schema.slot(k).is_none()).collect();
    unknown.sort_unstable();
    let n_nk = unknown.len();
    verdicts.extend(unknown.into_iter().map(|k| (k.to_string(), Verdict::NK)));

    let mut breakdown = ErrorBreakdown::from_counts(n_nk, n_mk, n_sv, n_hv, 2 * gold.len());
    breakdown.per_slot_verdicts = verdicts;
    Ok(breakdown)
}
