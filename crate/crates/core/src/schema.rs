//! API schema, dialogue and argument-map data model.
//!
//! Every key that enters the system goes through [`canonicalize_key`] and
//! every value through [`canonicalize_value`], so downstream comparison is
//! a plain string comparison on canonical forms.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::similarity::values_match;

#[derive(Debug, Error, PartialEq)]
pub enum SchemaError {
    #[error("invalid key {0:?}: empty after canonicalization")]
    InvalidKey(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    ParseError {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate api_name {0:?}")]
    DuplicateApi(String),
    #[error("schema {api:?} is invalid at slot {slot:?}: {reason}")]
    SchemaInvalid { api: String, slot: String, reason: String },
    #[error("dialogue {id:?} is invalid: {reason}")]
    DialogueInvalid { id: String, reason: String },
    #[error("duplicate argument key {0:?}")]
    DuplicateKey(String),
    #[error("empty value for argument key {0:?}")]
    EmptyValue(String),
}

impl SchemaError {
    fn from_json(err: serde_json::Error) -> Self {
        SchemaError::ParseError {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}

/// Lowercase snake_case form used for every key and slot name.
pub fn canonicalize_key(raw: &str) -> Result<String, SchemaError> {
    let mut out = String::with_capacity(raw.len());
    let mut in_sep = false;
    for ch in raw.trim().chars() {
        if ch.is_whitespace() || ch == '-' {
            in_sep = true;
            continue;
        }
        if in_sep {
            out.push('_');
            in_sep = false;
        }
        out.extend(ch.to_lowercase());
    }
    if in_sep {
        // trailing hyphen run: trim() only removes whitespace
        out.push('_');
    }
    if out.is_empty() {
        return Err(SchemaError::InvalidKey(raw.to_string()));
    }
    Ok(out)
}

/// Lowercased, trimmed, with internal whitespace runs collapsed to one space.
pub fn canonicalize_value(raw: &str) -> String {
    let lowered = raw.to_lowercase();
    let mut out = String::with_capacity(lowered.len());
    for word in lowered.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlotKind {
    #[serde(alias = "free_text", alias = "text", alias = "string")]
    FreeText,
    Integer,
    Boolean,
    Categorical,
    Date,
    Time,
}

impl SlotKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SlotKind::FreeText => "free-text",
            SlotKind::Integer => "integer",
            SlotKind::Boolean => "boolean",
            SlotKind::Categorical => "categorical",
            SlotKind::Date => "date",
            SlotKind::Time => "time",
        }
    }
}

impl fmt::Display for SlotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotSpec {
    pub name: String,
    pub kind: SlotKind,
    #[serde(default)]
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowed_values: Option<Vec<String>>,
    #[serde(default = "default_required")]
    pub required: bool,
}

fn default_required() -> bool {
    true
}

impl SlotSpec {
    pub fn new(name: &str, kind: SlotKind, description: &str) -> Result<Self, SchemaError> {
        Ok(SlotSpec {
            name: canonicalize_key(name)?,
            kind,
            description: description.to_string(),
            allowed_values: None,
            required: true,
        })
    }

    pub fn categorical(name: &str, description: &str, allowed: &[&str]) -> Result<Self, SchemaError> {
        let mut slot = SlotSpec::new(name, SlotKind::Categorical, description)?;
        slot.allowed_values = Some(allowed.iter().map(|v| canonicalize_value(v)).collect());
        Ok(slot)
    }

    /// Canonicalizes name and allowed values in place and checks the slot invariants.
    fn normalize(&mut self, api: &str) -> Result<(), SchemaError> {
        let invalid = |slot: &str, reason: &str| SchemaError::SchemaInvalid {
            api: api.to_string(),
            slot: slot.to_string(),
            reason: reason.to_string(),
        };
        self.name = canonicalize_key(&self.name).map_err(|_| invalid(&self.name, "empty slot name"))?;
        match (self.kind, self.allowed_values.take()) {
            (SlotKind::Categorical, Some(values)) => {
                let values: Vec<String> = values.iter().map(|v| canonicalize_value(v)).collect();
                if values.is_empty() || values.iter().any(String::is_empty) {
                    return Err(invalid(&self.name, "categorical slot needs non-empty allowed_values"));
                }
                let mut seen = HashSet::new();
                if !values.iter().all(|v| seen.insert(v.as_str())) {
                    return Err(invalid(&self.name, "duplicate allowed value"));
                }
                self.allowed_values = Some(values);
            }
            (SlotKind::Categorical, None) => {
                return Err(invalid(&self.name, "categorical slot needs allowed_values"));
            }
            (_, Some(_)) => {
                return Err(invalid(&self.name, "allowed_values only valid for categorical slots"));
            }
            (_, None) => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiSchema {
    pub api_name: String,
    #[serde(default)]
    pub description: String,
    pub slots: Vec<SlotSpec>,
}

impl ApiSchema {
    /// Builds a schema, canonicalizing slot names and checking invariants.
    pub fn new(api_name: &str, description: &str, slots: Vec<SlotSpec>) -> Result<Self, SchemaError> {
        let mut schema = ApiSchema {
            api_name: api_name.to_string(),
            description: description.to_string(),
            slots,
        };
        schema.normalize()?;
        Ok(schema)
    }

    fn normalize(&mut self) -> Result<(), SchemaError> {
        if self.slots.is_empty() {
            return Err(SchemaError::SchemaInvalid {
                api: self.api_name.clone(),
                slot: String::new(),
                reason: "schema has no slots".into(),
            });
        }
        let mut seen = HashSet::new();
        for slot in &mut self.slots {
            slot.normalize(&self.api_name)?;
            if !seen.insert(slot.name.clone()) {
                return Err(SchemaError::SchemaInvalid {
                    api: self.api_name.clone(),
                    slot: slot.name.clone(),
                    reason: "duplicate slot name".into(),
                });
            }
        }
        Ok(())
    }

    pub fn slot(&self, name: &str) -> Option<&SlotSpec> {
        self.slots.iter().find(|s| s.name == name)
    }

    pub fn slot_index(&self, name: &str) -> Option<usize> {
        self.slots.iter().position(|s| s.name == name)
    }
}

/// Schemas keyed by api name.
pub type SchemaCatalog = BTreeMap<String, ApiSchema>;

pub fn load_schema_catalog(source: &[u8]) -> Result<SchemaCatalog, SchemaError> {
    let raw: Vec<ApiSchema> = serde_json::from_slice(source).map_err(SchemaError::from_json)?;
    let mut catalog = SchemaCatalog::new();
    for mut schema in raw {
        schema.normalize()?;
        if catalog.contains_key(&schema.api_name) {
            return Err(SchemaError::DuplicateApi(schema.api_name));
        }
        catalog.insert(schema.api_name.clone(), schema);
    }
    Ok(catalog)
}

/// Serializes a catalog in the same document format [`load_schema_catalog`] reads.
pub fn serialize_schema_catalog(catalog: &SchemaCatalog) -> String {
    let list: Vec<&ApiSchema> = catalog.values().collect();
    serde_json::to_string_pretty(&list).expect("schema serialization is infallible")
}

/// Whether `value` (already canonical) is legal for the slot's kind.
pub fn value_conforms_to_slot(slot: &SlotSpec, value: &str) -> bool {
    if value.is_empty() {
        return false;
    }
    match slot.kind {
        SlotKind::FreeText => true,
        SlotKind::Integer => is_integer(value),
        SlotKind::Boolean => matches!(value, "true" | "false" | "yes" | "no"),
        SlotKind::Categorical => slot
            .allowed_values
            .as_deref()
            .unwrap_or_default()
            .iter()
            .any(|allowed| values_match(value, allowed)),
        SlotKind::Date => is_date(value),
        SlotKind::Time => is_time(value),
    }
}

fn is_integer(value: &str) -> bool {
    let digits = value.strip_prefix(['-', '+']).unwrap_or(value);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

const MONTHS: &str = "january|february|march|april|may|june|july|august|september|october|november|december|jan|feb|mar|apr|jun|jul|aug|sept|sep|oct|nov|dec";

fn date_patterns() -> &'static [Regex; 4] {
    static PATTERNS: OnceLock<[Regex; 4]> = OnceLock::new();
    PATTERNS.get_or_init(|| {
        let day = r"(\d{1,2})(?:st|nd|rd|th)?";
        [
            Regex::new(r"^(\d{4})-(\d{2})-(\d{2})$").unwrap(),
            Regex::new(r"^(\d{1,2})/(\d{1,2})(?:/(\d{4}))?$").unwrap(),
            // march 3, march 3rd, march 3rd, 2019
            Regex::new(&format!(r"^(?:{MONTHS})\.? {day}(?:,? (\d{{4}}))?$")).unwrap(),
            // 3 march, 3rd of march 2019
            Regex::new(&format!(r"^{day}(?: of)? (?:{MONTHS})\.?(?:,? (\d{{4}}))?$")).unwrap(),
        ]
    })
}

fn in_range(text: Option<regex::Match<'_>>, lo: u32, hi: u32) -> bool {
    text.and_then(|m| m.as_str().parse::<u32>().ok())
        .is_some_and(|v| (lo..=hi).contains(&v))
}

fn is_date(value: &str) -> bool {
    let [iso, slash, month_day, day_month] = date_patterns();
    if let Some(c) = iso.captures(value) {
        return in_range(c.get(2), 1, 12) && in_range(c.get(3), 1, 31);
    }
    if let Some(c) = slash.captures(value) {
        return in_range(c.get(1), 1, 12) && in_range(c.get(2), 1, 31);
    }
    if let Some(c) = month_day.captures(value) {
        return in_range(c.get(1), 1, 31);
    }
    if let Some(c) = day_month.captures(value) {
        return in_range(c.get(1), 1, 31);
    }
    false
}

fn is_time(value: &str) -> bool {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    let pattern = PATTERN.get_or_init(|| Regex::new(r"^(\d{1,2})(?::(\d{2}))? ?(am|pm)?$").unwrap());
    let Some(c) = pattern.captures(value) else {
        return false;
    };
    if c.get(2).is_some() && !in_range(c.get(2), 0, 59) {
        return false;
    }
    if c.get(3).is_some() {
        in_range(c.get(1), 1, 12)
    } else {
        in_range(c.get(1), 0, 23)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    #[serde(alias = "USER", alias = "User")]
    User,
    #[serde(alias = "AGENT", alias = "Agent", alias = "system", alias = "SYSTEM")]
    Agent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogueTurn {
    pub speaker: Speaker,
    pub utterance: String,
}

/// Ordered key/value pairs with unique canonical keys and non-empty values.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ArgumentMap {
    entries: Vec<(String, String)>,
}

impl ArgumentMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Canonicalizes and appends an entry. Rejects duplicate keys and empty values.
    pub fn insert(&mut self, key: &str, value: &str) -> Result<(), SchemaError> {
        let key = canonicalize_key(key)?;
        let value = canonicalize_value(value);
        if value.is_empty() {
            return Err(SchemaError::EmptyValue(key));
        }
        if self.get(&key).is_some() {
            return Err(SchemaError::DuplicateKey(key));
        }
        self.entries.push((key, value));
        Ok(())
    }

    pub fn from_pairs<K: AsRef<str>, V: AsRef<str>>(
        pairs: impl IntoIterator<Item = (K, V)>,
    ) -> Result<Self, SchemaError> {
        let mut map = ArgumentMap::new();
        for (k, v) in pairs {
            map.insert(k.as_ref(), v.as_ref())?;
        }
        Ok(map)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.get(key).is_some()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    /// Same entries ordered by their slot position in `schema`; keys outside the
    /// schema keep their relative order at the end.
    pub fn in_schema_order(&self, schema: &ApiSchema) -> ArgumentMap {
        let mut entries = self.entries.clone();
        entries.sort_by_key(|(k, _)| schema.slot_index(k).unwrap_or(usize::MAX));
        ArgumentMap { entries }
    }
}

impl Serialize for ArgumentMap {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.entries.len()))?;
        for (k, v) in &self.entries {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for ArgumentMap {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = serde_json::Map::<String, serde_json::Value>::deserialize(deserializer)?;
        let mut map = ArgumentMap::new();
        for (k, v) in raw {
            let text = match v {
                serde_json::Value::String(s) => s,
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::Bool(b) => b.to_string(),
                other => {
                    return Err(serde::de::Error::custom(format!(
                        "argument {k:?} must be a scalar, got {other}"
                    )))
                }
            };
            map.insert(&k, &text).map_err(serde::de::Error::custom)?;
        }
        Ok(map)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dialogue {
    pub id: String,
    #[serde(default)]
    pub domain: String,
    pub target_api: String,
    pub turns: Vec<DialogueTurn>,
    #[serde(default)]
    pub gold_arguments: ArgumentMap,
}

impl Dialogue {
    pub fn validate(&self, catalog: &SchemaCatalog) -> Result<(), SchemaError> {
        let invalid = |reason: String| SchemaError::DialogueInvalid {
            id: self.id.clone(),
            reason,
        };
        if self.turns.is_empty() {
            return Err(invalid("no turns".into()));
        }
        if let Some(i) = self.turns.iter().position(|t| t.utterance.trim().is_empty()) {
            return Err(invalid(format!("turn {i} has an empty utterance")));
        }
        if !catalog.contains_key(&self.target_api) {
            return Err(invalid(format!(
                "target_api {:?} not in schema catalog",
                self.target_api
            )));
        }
        Ok(())
    }
}

/// Reads a JSONL dialogue dataset, rejecting duplicate ids, without schema checks.
pub fn read_dialogues(source: &[u8]) -> Result<Vec<Dialogue>, SchemaError> {
    let text = String::from_utf8_lossy(source);
    let mut dialogues = Vec::new();
    let mut ids = HashSet::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let dialogue: Dialogue = serde_json::from_str(line).map_err(|e| SchemaError::ParseError {
            line: idx + 1,
            column: e.column(),
            message: e.to_string(),
        })?;
        if !ids.insert(dialogue.id.clone()) {
            return Err(SchemaError::DialogueInvalid {
                id: dialogue.id,
                reason: "duplicate dialogue id".into(),
            });
        }
        dialogues.push(dialogue);
    }
    Ok(dialogues)
}

/// Reads a JSONL dialogue dataset and validates it against the catalog.
pub fn load_dialogues(source: &[u8], catalog: &SchemaCatalog) -> Result<Vec<Dialogue>, SchemaError> {
    let dialogues = read_dialogues(source)?;
    for d in &dialogues {
        d.validate(catalog)?;
    }
    Ok(dialogues)
}

pub fn dialogues_to_jsonl(dialogues: &[Dialogue]) -> String {
    let mut out = String::new();
    for d in dialogues {
        out.push_str(&serde_json::to_string(d).expect("dialogue serialization is infallible"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slot(kind: SlotKind) -> SlotSpec {
        SlotSpec::new("x", kind, "").unwrap()
    }

    #[test]
    fn canonical_keys() {
        assert_eq!(canonicalize_key("Appointment Time").unwrap(), "appointment_time");
        assert_eq!(canonicalize_key("name").unwrap(), "name");
        assert_eq!(canonicalize_key("  Stylist-Name ").unwrap(), "stylist_name");
        assert_eq!(canonicalize_key("a - \t b").unwrap(), "a_b");
        assert_eq!(canonicalize_key("   "), Err(SchemaError::InvalidKey("   ".into())));
    }

    #[test]
    fn canonical_values() {
        assert_eq!(canonicalize_value("New   York"), "new york");
        assert_eq!(canonicalize_value("3pm"), "3pm");
        assert_eq!(canonicalize_value("  JESS "), "jess");
        assert_eq!(canonicalize_value(" \n "), "");
    }

    #[test]
    fn conformance_examples() {
        let stylist = SlotSpec::categorical("stylist", "", &["Jess", "Jack"]).unwrap();
        assert!(value_conforms_to_slot(&stylist, "jess"));
        assert!(!value_conforms_to_slot(&stylist, "purple"));
        assert!(!value_conforms_to_slot(&slot(SlotKind::Integer), "3pm"));
        assert!(value_conforms_to_slot(&slot(SlotKind::Integer), "-12"));
        assert!(value_conforms_to_slot(&slot(SlotKind::Time), "3pm"));
    }

    #[test]
    fn time_grammar() {
        let time = slot(SlotKind::Time);
        for ok in [
            "3pm", "3 pm", "3:30pm", "11:15 am", "12am", "14:30", "09:05", "7", "0:00",
        ] {
            assert!(value_conforms_to_slot(&time, ok), "{ok}");
        }
        for bad in ["purple", "noon", "13pm", "0am", "3:75", "25:00", "3p.m.", "", "3:5pm"] {
            assert!(!value_conforms_to_slot(&time, bad), "{bad}");
        }
    }

    #[test]
    fn date_grammar() {
        let date = slot(SlotKind::Date);
        for ok in [
            "2019-03-01",
            "3/1",
            "3/1/2019",
            "march 3",
            "march 3rd",
            "march 3rd, 2019",
            "mar 3",
            "3 march",
            "1st of march",
            "21st of march 2019",
        ] {
            assert!(value_conforms_to_slot(&date, ok), "{ok}");
        }
        for bad in ["tomorrow", "2019-13-01", "13/1", "march 40", "purple", "3pm"] {
            assert!(!value_conforms_to_slot(&date, bad), "{bad}");
        }
    }

    #[test]
    fn boolean_and_free_text() {
        let b = slot(SlotKind::Boolean);
        assert!(value_conforms_to_slot(&b, "yes"));
        assert!(value_conforms_to_slot(&b, "false"));
        assert!(!value_conforms_to_slot(&b, "maybe"));
        assert!(value_conforms_to_slot(&slot(SlotKind::FreeText), "anything at all"));
    }

    const CATALOG: &str = r#"[
      {"api_name": "hair_appointment", "description": "Book a haircut",
       "slots": [
         {"name": "Name", "kind": "free-text", "description": "customer name"},
         {"name": "time", "kind": "time", "description": "start time"},
         {"name": "stylist", "kind": "categorical", "description": "stylist",
          "allowed_values": ["Jess", "Jack"], "required": false}
       ]}
    ]"#;

    #[test]
    fn load_catalog() {
        let catalog = load_schema_catalog(CATALOG.as_bytes()).unwrap();
        assert_eq!(catalog.len(), 1);
        let schema = &catalog["hair_appointment"];
        assert_eq!(schema.slots[0].name, "name");
        assert!(schema.slots[0].required);
        assert!(!schema.slots[2].required);
        assert_eq!(
            schema.slots[2].allowed_values.as_deref(),
            Some(&["jess".to_string(), "jack".to_string()][..])
        );
        let reloaded = load_schema_catalog(serialize_schema_catalog(&catalog).as_bytes()).unwrap();
        assert_eq!(reloaded, catalog);
    }

    #[test]
    fn catalog_errors() {
        let one = r#"{"api_name": "a", "slots": [{"name": "x", "kind": "integer"}]}"#;
        let dup = format!("[{one}, {one}]");
        assert_eq!(
            load_schema_catalog(dup.as_bytes()),
            Err(SchemaError::DuplicateApi("a".into()))
        );

        let empty_cat = r#"[{"api_name": "a", "slots": [{"name": "s", "kind": "categorical", "allowed_values": []}]}]"#;
        match load_schema_catalog(empty_cat.as_bytes()) {
            Err(SchemaError::SchemaInvalid { slot, .. }) => assert_eq!(slot, "s"),
            other => panic!("unexpected {other:?}"),
        }

        let stray = r#"[{"api_name": "a", "slots": [{"name": "s", "kind": "integer", "allowed_values": ["1"]}]}]"#;
        assert!(matches!(
            load_schema_catalog(stray.as_bytes()),
            Err(SchemaError::SchemaInvalid { .. })
        ));

        let dup_values =
            r#"[{"api_name": "a", "slots": [{"name": "s", "kind": "categorical", "allowed_values": ["X", "x "]}]}]"#;
        assert!(matches!(
            load_schema_catalog(dup_values.as_bytes()),
            Err(SchemaError::SchemaInvalid { .. })
        ));

        let no_slots = r#"[{"api_name": "a", "slots": []}]"#;
        assert!(matches!(
            load_schema_catalog(no_slots.as_bytes()),
            Err(SchemaError::SchemaInvalid { .. })
        ));

        match load_schema_catalog(b"[\n  {\"api_name\": }") {
            Err(SchemaError::ParseError { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn argument_map_invariants() {
        let mut map = ArgumentMap::new();
        map.insert("Stylist Name", " JESS ").unwrap();
        assert_eq!(map.get("stylist_name"), Some("jess"));
        assert_eq!(
            map.insert("stylist-name", "x"),
            Err(SchemaError::DuplicateKey("stylist_name".into()))
        );
        assert_eq!(map.insert("t", "  "), Err(SchemaError::EmptyValue("t".into())));
        let json = serde_json::to_string(&map).unwrap();
        assert_eq!(json, r#"{"stylist_name":"jess"}"#);
        let back: ArgumentMap = serde_json::from_str(r#"{"Party Size": 3, "ok": true}"#).unwrap();
        assert_eq!(back.get("party_size"), Some("3"));
        assert_eq!(back.get("ok"), Some("true"));
    }

    #[test]
    fn dialogues_validate_against_catalog() {
        let catalog = load_schema_catalog(CATALOG.as_bytes()).unwrap();
        let line = r#"{"id": "d1", "domain": "salon", "target_api": "hair_appointment", "turns": [{"speaker": "user", "utterance": "Book me at 3pm"}], "gold_arguments": {"time": "3pm"}}"#;
        let ds = load_dialogues(format!("{line}\n{line}").as_bytes(), &catalog);
        assert!(matches!(ds, Err(SchemaError::DialogueInvalid { .. })));
        let ds = load_dialogues(line.as_bytes(), &catalog).unwrap();
        assert_eq!(ds[0].gold_arguments.get("time"), Some("3pm"));
        let unknown = line.replace("hair_appointment", "nope");
        assert!(load_dialogues(unknown.as_bytes(), &catalog).is_err());
        let round = load_dialogues(dialogues_to_jsonl(&ds).as_bytes(), &catalog).unwrap();
        assert_eq!(round, ds);
    }
}
