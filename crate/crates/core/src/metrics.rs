//! Corpus-level evaluation: BLEU, fuzzy-match rate, character F1, error rates.
//!
//! All corpus figures are micro-averaged: per-pair statistics are integer
//! counts that are summed before any division, so the result does not depend
//! on evaluation order or on parallel reduction.

use std::collections::HashMap;
use std::ops::Add;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{map_indexed, Execution};
use crate::parser::{serialize_argument_map, KeyOrder};
use crate::schema::ArgumentMap;
use crate::scoring::{values_match, ErrorBreakdown};

pub const BLEU_MAX_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("{pairs} prediction pairs but {breakdowns} breakdowns")]
    AlignmentError { pairs: usize, breakdowns: usize },
}

/// One prediction paired with its gold arguments.
pub type EvalPair = (ArgumentMap, ArgumentMap);

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorRates {
    pub nk: f64,
    pub mk: f64,
    pub sv: f64,
    pub hv: f64,
}

impl ErrorRates {
    /// Per-type error counts summed over the corpus, divided by summed `n_total`.
    pub fn from_breakdowns<'a>(breakdowns: impl IntoIterator<Item = &'a ErrorBreakdown>) -> Self {
        let (mut nk, mut mk, mut sv, mut hv, mut total) = (0usize, 0usize, 0usize, 0usize, 0usize);
        for b in breakdowns {
            nk += b.n_nk;
            mk += b.n_mk;
            sv += b.n_sv;
            hv += b.n_hv;
            total += b.n_total;
        }
        if total == 0 {
            return ErrorRates::default();
        }
        let t = total as f64;
        ErrorRates {
            nk: nk as f64 / t,
            mk: mk as f64 / t,
            sv: sv as f64 / t,
            hv: hv as f64 / t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub bleu: f64,
    /// Slot-level fuzzy-match percentage, 0 to 100.
    pub fm: f64,
    pub f1: f64,
    /// Percentage of samples whose every gold slot matched with no extra keys.
    pub fm_strict: f64,
    pub n_samples: usize,
    pub error_rates: ErrorRates,
}

pub const REPORT_CSV_HEADER: &str =
    "dataset,split,backend,bleu,fm,f1,nk_rate,mk_rate,sv_rate,hv_rate,n_samples,fm_strict";

impl MetricsReport {
    /// One CSV row (without header) in [`REPORT_CSV_HEADER`] column order.
    pub fn csv_row(&self, dataset: &str, split: &str, backend: &str) -> String {
        let r = &self.error_rates;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(dataset),
            csv_field(split),
            csv_field(backend),
            self.bleu,
            self.fm,
            self.f1,
            r.nk,
            r.mk,
            r.sv,
            r.hv,
            self.n_samples,
            self.fm_strict
        )
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct SlotMatches {
    matched: usize,
    gold_slots: usize,
    strict_ok: bool,
}

fn slot_matches(pred: &ArgumentMap, gold: &ArgumentMap) -> SlotMatches {
    let matched = gold
        .iter()
        .filter(|(k, g)| pred.get(k).is_some_and(|p| values_match(p, g)))
        .count();
    let extra = pred.keys().any(|k| !gold.contains_key(k));
    SlotMatches {
        matched,
        gold_slots: gold.len(),
        strict_ok: matched == gold.len() && !extra,
    }
}

fn percentage(num: usize, den: usize) -> f64 {
    if den == 0 {
        100.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

pub fn fuzzy_match_rate(pairs: &[EvalPair]) -> Result<f64, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let (matched, total) = pairs.iter().fold((0, 0), |(m, t), (p, g)| {
        let s = slot_matches(p, g);
        (m + s.matched, t + s.gold_slots)
    });
    Ok(percentage(matched, total))
}

/// Character-multiset overlap counts for one pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CharCounts {
    pub overlap: usize,
    pub pred_chars: usize,
    pub gold_chars: usize,
}

impl Add for CharCounts {
    type Output = CharCounts;
    fn add(self, o: CharCounts) -> CharCounts {
        CharCounts {
            overlap: self.overlap + o.overlap,
            pred_chars: self.pred_chars + o.pred_chars,
            gold_chars: self.gold_chars + o.gold_chars,
        }
    }
}

impl CharCounts {
    pub fn of(pred: &ArgumentMap, gold: &ArgumentMap) -> Self {
        let mut counts = CharCounts {
            overlap: 0,
            pred_chars: pred.iter().map(|(_, v)| v.chars().count()).sum(),
            gold_chars: gold.iter().map(|(_, v)| v.chars().count()).sum(),
        };
        for (key, p) in pred.iter() {
            if let Some(g) = gold.get(key) {
                counts.overlap += multiset_intersection(p, g);
            }
        }
        counts
    }

    pub fn f1(&self) -> f64 {
        if self.pred_chars == 0 || self.gold_chars == 0 || self.overlap == 0 {
            return 0.0;
        }
        let p = self.overlap as f64 / self.pred_chars as f64;
        let r = self.overlap as f64 / self.gold_chars as f64;
        2.0 * p * r / (p + r)
    }
}

fn multiset_intersection(a: &str, b: &str) -> usize {
    let mut bag: HashMap<char, usize> = HashMap::new();
    for c in a.chars() {
        *bag.entry(c).or_default() += 1;
    }
    b.chars()
        .filter(|c| match bag.get_mut(c) {
            Some(n) if *n > 0 => {
                *n -= 1;
                true
            }
            _ => false,
        })
        .count()
}

pub fn char_f1(pred: &ArgumentMap, gold: &ArgumentMap) -> f64 {
    CharCounts::of(pred, gold).f1()
}

/// Clipped n-gram matches and candidate n-gram totals for orders 1..=4,
/// plus hypothesis and reference lengths.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: [usize; BLEU_MAX_ORDER],
    pub totals: [usize; BLEU_MAX_ORDER],
    pub hyp_len: usize,
    pub ref_len: usize,
}

impl Add for BleuStats {
    type Output = BleuStats;
    fn add(mut self, o: BleuStats) -> BleuStats {
        for n in 0..BLEU_MAX_ORDER {
            self.matches[n] += o.matches[n];
            self.totals[n] += o.totals[n];
        }
        self.hyp_len += o.hyp_len;
        self.ref_len += o.ref_len;
        self
    }
}

fn ngram_counts<'t>(tokens: &'t [&str], n: usize) -> HashMap<&'t [&'t str], usize> {
    let mut counts = HashMap::new();
    for w in tokens.windows(n) {
        *counts.entry(w).or_insert(0) += 1;
    }
    counts
}

impl BleuStats {
    pub fn of_texts(hyp: &str, reference: &str) -> Self {
        let h: Vec<&str> = hyp.split_whitespace().collect();
        let r: Vec<&str> = reference.split_whitespace().collect();
        let mut stats = BleuStats {
            hyp_len: h.len(),
            ref_len: r.len(),
            ..Default::default()
        };
        for n in 1..=BLEU_MAX_ORDER {
            let hc = ngram_counts(&h, n);
            let rc = ngram_counts(&r, n);
            stats.totals[n - 1] = h.len().saturating_sub(n - 1);
            stats.matches[n - 1] = hc.iter().map(|(g, c)| (*c).min(rc.get(g).copied().unwrap_or(0))).sum();
        }
        stats
    }

    pub fn of_pair(pred: &ArgumentMap, gold: &ArgumentMap) -> Self {
        BleuStats::of_texts(
            &serialize_argument_map(pred, KeyOrder::Sorted),
            &serialize_argument_map(gold, KeyOrder::Sorted),
        )
    }

    /// Geometric mean of modified precisions times brevity penalty. Orders
    /// above one use add-one smoothing.
    pub fn score(&self) -> f64 {
        if self.hyp_len == 0 || self.matches[0] == 0 {
            return 0.0;
        }
        let mut log_sum = (self.matches[0] as f64 / self.totals[0] as f64).ln();
        for n in 1..BLEU_MAX_ORDER {
            log_sum += ((self.matches[n] + 1) as f64 / (self.totals[n] + 1) as f64).ln();
        }
        let bp = if self.hyp_len > self.ref_len {
            1.0
        } else {
            (1.0 - self.ref_len as f64 / self.hyp_len as f64).exp()
        };
        bp * (log_sum / BLEU_MAX_ORDER as f64).exp()
    }
}

pub fn corpus_bleu(pairs: &[EvalPair]) -> Result<f64, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let stats = pairs
        .iter()
        .map(|(p, g)| BleuStats::of_pair(p, g))
        .fold(BleuStats::default(), Add::add);
    Ok(stats.score())
}

pub fn evaluate_corpus(
    pairs: &[EvalPair],
    breakdowns: &[ErrorBreakdown],
    exec: Execution,
) -> Result<MetricsReport, MetricsError> {
    if pairs.len() != breakdowns.len() {
        return Err(MetricsError::AlignmentError {
            pairs: pairs.len(),
            breakdowns: breakdowns.len(),
        });
    }
    if pairs.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let per_pair = map_indexed(pairs, exec, |(p, g)| {
        (BleuStats::of_pair(p, g), CharCounts::of(p, g), slot_matches(p, g))
    });

    let mut bleu = BleuStats::default();
    let mut chars = CharCounts::default();
    let (mut matched, mut gold_slots, mut strict) = (0, 0, 0);
    for (b, c, s) in per_pair {
        bleu = bleu + b;
        chars = chars + c;
        matched += s.matched;
        gold_slots += s.gold_slots;
        strict += usize::from(s.strict_ok);
    }
    Ok(MetricsReport {
        bleu: bleu.score(),
        fm: percentage(matched, gold_slots),
        f1: chars.f1(),
        fm_strict: percentage(strict, pairs.len()),
        n_samples: pairs.len(),
        error_rates: ErrorRates::from_breakdowns(breakdowns),
    })
}
