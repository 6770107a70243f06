//! Prediction records and the per-group error-rate panel.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::metrics::{csv_field, ErrorRates, MetricsError};
use crate::schema::ArgumentMap;
use crate::scoring::ErrorBreakdown;

/// One line of a predictions JSONL file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
    #[serde(default)]
    pub arguments: ArgumentMap,
    /// Raw model text; parsed when `arguments` is empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakdown: Option<ErrorBreakdown>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl PredictionRecord {
    pub fn new(id: impl Into<String>, arguments: ArgumentMap) -> Self {
        PredictionRecord {
            id: id.into(),
            model: None,
            split: None,
            arguments,
            raw: None,
            breakdown: None,
            warnings: Vec::new(),
        }
    }
}

pub fn records_to_jsonl(records: &[PredictionRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serialization is infallible"));
        out.push('\n');
    }
    out
}

pub fn records_from_jsonl(text: &str) -> Result<Vec<PredictionRecord>, (usize, serde_json::Error)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| (i + 1, e)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    Model,
    Split,
}

impl std::str::FromStr for GroupBy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "model" => Ok(GroupBy::Model),
            "split" => Ok(GroupBy::Split),
            other => Err(format!("unknown group {other:?} (expected model or split)")),
        }
    }
}

pub const ERROR_PANEL_HEADER: &str = "group,nk_rate,mk_rate,sv_rate,hv_rate,n_samples";

/// CSV with one row per group, groups in lexicographic order. Records
/// without a breakdown are ignored; records without the grouping label fall
/// into the group `unknown`.
pub fn emit_error_panel(records: &[PredictionRecord], group_by: GroupBy) -> Result<String, MetricsError> {
    let mut groups: BTreeMap<&str, Vec<&ErrorBreakdown>> = BTreeMap::new();
    for r in records {
        let Some(b) = &r.breakdown else { continue };
        let label = match group_by {
            GroupBy::Model => r.model.as_deref(),
            GroupBy::Split => r.split.as_deref(),
        };
        groups.entry(label.unwrap_or("unknown")).or_default().push(b);
    }
    if groups.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let mut out = String::from(ERROR_PANEL_HEADER);
    out.push('\n');
    for (group, breakdowns) in groups {
        let r = ErrorRates::from_breakdowns(breakdowns.iter().copied());
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_field(group),
            r.nk,
            r.mk,
            r.sv,
            r.hv,
            breakdowns.len()
        ));
    }
    Ok(out)
}
