//! Reference implementations written from the definitions, sharing no code
//! with the library scorer or metrics.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use arground_core::schema::{ApiSchema, ArgumentMap, SlotKind, SlotSpec};

/// Pairwise far apart under any edit-distance threshold, so value matching
/// reduces to equality.
pub const ALPHABET: [&str; 4] = ["john", "3pm", "7", "yes"];

pub const SLOT_NAMES: [&str; 3] = ["name", "time", "count"];
pub const FOREIGN_KEYS: [&str; 2] = ["color", "mood"];

#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    FreeText,
    Integer,
    Boolean,
    Time,
    Categorical(Vec<&'static str>),
}

/// Hand-labelled conformance for the alphabet.
pub fn conforms(kind: &Kind, value: &str) -> bool {
    match kind {
        Kind::FreeText => true,
        Kind::Integer => value == "7",
        Kind::Boolean => value == "yes",
        Kind::Time => value == "3pm" || value == "7",
        Kind::Categorical(allowed) => allowed.contains(&value),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub name: &'static str,
    pub kind: Kind,
}

pub type Pairs = Vec<(&'static str, &'static str)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub nk: usize,
    pub mk: usize,
    pub sv: usize,
    pub hv: usize,
    pub total: usize,
}

fn lookup(pairs: &Pairs, key: &str) -> Option<&'static str> {
    let mut found = None;
    for (k, v) in pairs {
        if *k == key {
            found = Some(*v);
        }
    }
    found
}

/// Walks every predicted key and every gold key against the schema by
/// definition: schema-external keys are NK, each gold key without a
/// prediction is one MK, a schema key whose value differs from gold (or has
/// no gold) is SV when the value conforms and HV otherwise.
pub fn classify(schema: &[Slot], pred: &Pairs, gold: &Pairs) -> Counts {
    let mut c = Counts {
        total: 2 * gold.len(),
        ..Counts::default()
    };
    for (key, value) in pred {
        let mut slot = None;
        for s in schema {
            if s.name == *key {
                slot = Some(s);
            }
        }
        let Some(slot) = slot else {
            c.nk += 1;
            continue;
        };
        if lookup(gold, key) == Some(*value) {
            continue;
        }
        if conforms(&slot.kind, value) {
            c.sv += 1;
        } else {
            c.hv += 1;
        }
    }
    for (key, _) in gold {
        if lookup(pred, key).is_none() {
            c.mk += 1;
        }
    }
    c
}

pub fn reward(c: &Counts) -> f64 {
    let errors = (c.nk + c.mk + c.sv + c.hv) as f64;
    if c.total == 0 {
        return if errors == 0.0 { 1.0 } else { -1.0 };
    }
    (1.0 - 2.0 * errors / c.total as f64).clamp(-1.0, 1.0)
}

pub fn to_schema(slots: &[Slot]) -> ApiSchema {
    let specs = slots
        .iter()
        .map(|s| match &s.kind {
            Kind::Categorical(allowed) => SlotSpec::categorical(s.name, "", allowed).unwrap(),
            kind => {
                let k = match kind {
                    Kind::FreeText => SlotKind::FreeText,
                    Kind::Integer => SlotKind::Integer,
                    Kind::Boolean => SlotKind::Boolean,
                    Kind::Time => SlotKind::Time,
                    Kind::Categorical(_) => unreachable!(),
                };
                SlotSpec::new(s.name, k, "").unwrap()
            }
        })
        .collect();
    ApiSchema::new("oracle_api", "", specs).unwrap()
}

pub fn to_map(pairs: &Pairs) -> ArgumentMap {
    ArgumentMap::from_pairs(pairs.iter().copied()).unwrap()
}

pub fn random_kind(rng: &mut ChaCha8Rng) -> Kind {
    match rng.random_range(0..5) {
        0 => Kind::FreeText,
        1 => Kind::Integer,
        2 => Kind::Boolean,
        3 => Kind::Time,
        _ => {
            let mut allowed: Vec<&'static str> = ALPHABET.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
            if allowed.is_empty() {
                allowed.push(ALPHABET[rng.random_range(0..ALPHABET.len())]);
            }
            Kind::Categorical(allowed)
        }
    }
}

/// Random schema of one to three slots, a gold map over its slots and a
/// prediction drawing keys from the schema and outside it.
pub fn random_triple(rng: &mut ChaCha8Rng) -> (Vec<Slot>, Pairs, Pairs) {
    let n_slots = rng.random_range(1..=3);
    let schema: Vec<Slot> = SLOT_NAMES[..n_slots]
        .iter()
        .map(|name| Slot {
            name,
            kind: random_kind(rng),
        })
        .collect();
    let pick = |rng: &mut ChaCha8Rng| ALPHABET[rng.random_range(0..ALPHABET.len())];
    let mut gold = Vec::new();
    for s in &schema {
        if rng.random_bool(0.7) {
            gold.push((s.name, pick(rng)));
        }
    }
    let mut pred = Vec::new();
    for key in SLOT_NAMES[..n_slots].iter().chain(FOREIGN_KEYS.iter()) {
        if rng.random_bool(0.5) {
            pred.push((*key, pick(rng)));
        }
    }
    // order must not matter
    for i in (1..pred.len()).rev() {
        pred.swap(i, rng.random_range(0..=i));
    }
    (schema, pred, gold)
}

/// Every assignment of `keys` to a value from the alphabet or to absence.
pub fn all_assignments(keys: &[&'static str]) -> Vec<Pairs> {
    let mut out: Vec<Pairs> = vec![Vec::new()];
    for key in keys {
        let mut next = Vec::new();
        for partial in &out {
            next.push(partial.clone());
            for v in ALPHABET {
                let mut p = partial.clone();
                p.push((key, v));
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Corpus BLEU over (hypothesis, reference) pairs of space-separated
/// tokens: clipped n-gram precision for orders 1 to 4, add-one
/// smoothing above unigrams, brevity penalty on summed lengths.
pub fn reference_bleu(corpus: &[(String, String)]) -> f64 {
    let mut matches = [0usize; 4];
    let mut totals = [0usize; 4];
    let (mut hyp_len, mut ref_len) = (0, 0);
    for (hyp, reference) in corpus {
        let h: Vec<&str> = hyp.split(' ').filter(|t| !t.is_empty()).collect();
        let r: Vec<&str> = reference.split(' ').filter(|t| !t.is_empty()).collect();
        hyp_len += h.len();
        ref_len += r.len();
        for n in 1..=4 {
            if h.len() < n {
                continue;
            }
            let grams_h: Vec<&[&str]> = (0..=h.len() - n).map(|i| &h[i..i + n]).collect();
            let grams_r: Vec<&[&str]> = if r.len() >= n {
                (0..=r.len() - n).map(|i| &r[i..i + n]).collect()
            } else {
                Vec::new()
            };
            totals[n - 1] += grams_h.len();
            let mut used = vec![false; grams_r.len()];
            for g in &grams_h {
                if let Some(j) = (0..grams_r.len()).find(|&j| !used[j] && grams_r[j] == *g) {
                    used[j] = true;
                    matches[n - 1] += 1;
                }
            }
        }
    }
    if hyp_len == 0 || matches[0] == 0 {
        return 0.0;
    }
    let mut product = matches[0] as f64 / totals[0] as f64;
    for n in 1..4 {
        product *= (matches[n] as f64 + 1.0) / (totals[n] as f64 + 1.0);
    }
    let bp = if hyp_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    bp * product.powf(0.25)
}

/// Plain full-matrix edit distance over chars.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}
