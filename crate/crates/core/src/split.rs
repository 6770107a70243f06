//! In-domain and out-of-domain train/test splits.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schema::Dialogue;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplitError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("dialogue {0:?} has no domain")]
    MissingDomain(String),
    #[error("duplicate dialogue id {0:?}")]
    DuplicateId(String),
    #[error("test fraction {0} is outside (0, 1)")]
    InvalidFraction(f64),
    #[error("holdout domain {0:?} does not occur in the data")]
    UnknownDomain(String),
    #[error("no holdout domains given")]
    NoHoldout,
    #[error("split leaves the {0} side empty")]
    DegenerateSplit(&'static str),
    #[error("domain {0:?} occurs on both sides of the split")]
    Overlap(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Vec<Dialogue>,
    pub test: Vec<Dialogue>,
    pub manifest: SplitManifest,
    pub warnings: Vec<String>,
}

/// Auditable record of how a split was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holdout_domains: Option<Vec<String>>,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synonym_map: Option<BTreeMap<String, String>>,
}

fn sorted_by_id(dialogues: &[Dialogue]) -> Result<Vec<&Dialogue>, SplitError> {
    if dialogues.is_empty() {
        return Err(SplitError::EmptyDataset);
    }
    let mut seen = HashSet::new();
    for d in dialogues {
        if d.domain.trim().is_empty() {
            return Err(SplitError::MissingDomain(d.id.clone()));
        }
        if !seen.insert(d.id.as_str()) {
            return Err(SplitError::DuplicateId(d.id.clone()));
        }
    }
    let mut sorted: Vec<&Dialogue> = dialogues.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(sorted)
}

fn ids(ds: &[Dialogue]) -> Vec<String> {
    ds.iter().map(|d| d.id.clone()).collect()
}

/// Test-side size for a domain of `n` dialogues.
fn test_count(n: usize, fraction: f64) -> usize {
    if n < 2 {
        return 0;
    }
    ((fraction * n as f64).ceil() as usize).clamp(1, n - 1)
}

/// Stratified random split: every domain with at least two dialogues lands
/// on both sides. Outputs are ordered by dialogue id, so the result depends
/// only on the set of dialogues, the fraction and the seed.
pub fn split_in_domain(dialogues: &[Dialogue], test_fraction: f64, seed: u64) -> Result<Split, SplitError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(SplitError::InvalidFraction(test_fraction));
    }
    let sorted = sorted_by_id(dialogues)?;
    let mut by_domain: BTreeMap<&str, Vec<&Dialogue>> = BTreeMap::new();
    for d in sorted {
        by_domain.entry(d.domain.as_str()).or_default().push(d);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_ids = HashSet::new();
    let mut warnings = Vec::new();
    for (domain, mut members) in by_domain {
        if members.len() < 2 {
            warnings.push(format!("domain {domain:?} has a single dialogue; kept in train"));
        }
        members.shuffle(&mut rng);
        let n_test = test_count(members.len(), test_fraction);
        test_ids.extend(members[..n_test].iter().map(|d| d.id.clone()));
    }

    let (mut test, mut train): (Vec<Dialogue>, Vec<Dialogue>) =
        dialogues.iter().cloned().partition(|d| test_ids.contains(&d.id));
    train.sort_by(|a, b| a.id.cmp(&b.id));
    test.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(Split {
        manifest: SplitManifest {
            kind: "in-domain".into(),
            seed: Some(seed),
            test_fraction: Some(test_fraction),
            holdout_domains: None,
            train_ids: ids(&train),
            test_ids: ids(&test),
            synonym_map: None,
        },
        train,
        test,
        warnings,
    })
}

/// Holdout domains plus everything linked to them through the synonym map,
/// with links treated as undirected.
pub fn synonym_closure(holdout: &BTreeSet<String>, synonyms: &BTreeMap<String, String>) -> BTreeSet<String> {
    let mut closure = holdout.clone();
    loop {
        let before = closure.len();
        for (a, b) in synonyms {
            if closure.contains(a) || closure.contains(b) {
                closure.insert(a.clone());
                closure.insert(b.clone());
            }
        }
        if closure.len() == before {
            return closure;
        }
    }
}

pub fn split_out_of_domain(
    dialogues: &[Dialogue],
    holdout_domains: &BTreeSet<String>,
    synonyms: Option<&BTreeMap<String, String>>,
) -> Result<Split, SplitError> {
    if holdout_domains.is_empty() {
        return Err(SplitError::NoHoldout);
    }
    let sorted = sorted_by_id(dialogues)?;
    let present: BTreeSet<&str> = sorted.iter().map(|d| d.domain.as_str()).collect();
    if let Some(unknown) = holdout_domains.iter().find(|h| !present.contains(h.as_str())) {
        return Err(SplitError::UnknownDomain(unknown.clone()));
    }
    let empty = BTreeMap::new();
    let synonyms_map = synonyms.unwrap_or(&empty);
    let closure = synonym_closure(holdout_domains, synonyms_map);

    let (test, train): (Vec<Dialogue>, Vec<Dialogue>) =
        sorted.into_iter().cloned().partition(|d| closure.contains(&d.domain));
    if train.is_empty() {
        return Err(SplitError::DegenerateSplit("train"));
    }
    if let Some(d) = train.iter().find(|d| closure.contains(&d.domain)) {
        return Err(SplitError::Overlap(d.domain.clone()));
    }
    Ok(Split {
        manifest: SplitManifest {
            kind: "out-of-domain".into(),
            seed: None,
            test_fraction: None,
            holdout_domains: Some(holdout_domains.iter().cloned().collect()),
            train_ids: ids(&train),
            test_ids: ids(&test),
            synonym_map: synonyms.cloned(),
        },
        train,
        test,
        warnings: Vec::new(),
    })
}
