//! Converters from public dialogue dataset layouts into [`Dialogue`] and
//! [`ApiSchema`] records.
//!
//! Both converters take a single JSON document.
//!
//! **SGD**: `{"schema": [service...], "dialogues": [dialogue...]}` where the
//! two arrays follow the distribution's `schema.json` and dialogue files.
//! Each service intent becomes an API named `<service>.<intent>` whose slots
//! are the intent's required slots followed by its optional slots. Slot
//! `is_categorical` with `possible_values` maps to a categorical slot, every
//! other slot is free text. Each system frame carrying a `service_call`
//! becomes one dialogue, truncated before the turn that makes the call, with
//! the call parameters as gold arguments.
//!
//! **STAR**: `{"apis": [...], "dialogues": [...]}`. An API is
//! `{"name", "description"?, "input": [...], "required"?: [...]}` where each
//! input is either a slot name or `{"Name", "Type"?, "Description"?,
//! "PossibleValues"?, "Required"?}`. `Type` maps case-insensitively onto the
//! slot kinds; a non-empty `PossibleValues` makes the slot categorical. A
//! dialogue is `{"DialogueID", "Scenario": {"Domains": [...]}, "Events": [...]}`;
//! every wizard event with `"Action": "query"` becomes one dialogue built
//! from the preceding `utter` events, with its `Constraints` (a list of
//! single-entry objects) as gold arguments.

use std::collections::BTreeSet;

use serde_json::Value;
use thiserror::Error;

use crate::schema::{
    canonicalize_key, ApiSchema, ArgumentMap, Dialogue, DialogueTurn, SchemaCatalog, SlotKind, SlotSpec, Speaker,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("ingest failed at {record}: {reason}")]
pub struct IngestError {
    pub record: String,
    pub reason: String,
}

fn fail(record: impl Into<String>, reason: impl Into<String>) -> IngestError {
    IngestError {
        record: record.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExternalFormat {
    Sgd,
    Star,
}

impl std::str::FromStr for ExternalFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Ok(ExternalFormat::Sgd),
            "star" => Ok(ExternalFormat::Star),
            other => Err(format!("unknown format {other:?} (expected sgd or star)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub dialogues: Vec<Dialogue>,
    pub catalog: SchemaCatalog,
    pub warnings: Vec<String>,
}

pub fn ingest_external(dump: &[u8], format: ExternalFormat) -> Result<Ingested, IngestError> {
    let doc: Value = serde_json::from_slice(dump).map_err(|e| fail("document", e.to_string()))?;
    match format {
        ExternalFormat::Sgd => ingest_sgd(&doc),
        ExternalFormat::Star => ingest_star(&doc),
    }
}

fn str_field<'a>(v: &'a Value, key: &str, record: &str) -> Result<&'a str, IngestError> {
    v.get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| fail(record, format!("missing string field {key:?}")))
}

fn array_field<'a>(v: &'a Value, key: &str, record: &str) -> Result<&'a Vec<Value>, IngestError> {
    v.get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| fail(record, format!("missing array field {key:?}")))
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Array(a) => a.first().and_then(scalar_text),
        _ => None,
    }
}

fn domain_of(service: &str) -> String {
    service.split('_').next().unwrap_or(service).to_lowercase()
}

/// Appends `candidate` to `catalog`, recording invalid schemas as warnings.
fn add_schema(catalog: &mut SchemaCatalog, warnings: &mut Vec<String>, candidate: Result<ApiSchema, String>) {
    match candidate {
        Ok(schema) => {
            if catalog.contains_key(&schema.api_name) {
                warnings.push(format!("duplicate api {:?} ignored", schema.api_name));
            } else {
                catalog.insert(schema.api_name.clone(), schema);
            }
        }
        Err(w) => warnings.push(w),
    }
}

fn dedup_values(values: Vec<String>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    values
        .into_iter()
        .map(|v| crate::schema::canonicalize_value(&v))
        .filter(|v| !v.is_empty() && seen.insert(v.clone()))
        .collect()
}

fn sgd_slot(slot: &Value, record: &str) -> Result<SlotSpec, IngestError> {
    let name = str_field(slot, "name", record)?;
    let description = slot.get("description").and_then(Value::as_str).unwrap_or("");
    let values: Vec<String> = slot
        .get("possible_values")
        .and_then(Value::as_array)
        .map(|a| a.iter().filter_map(scalar_text).collect())
        .unwrap_or_default();
    let values = dedup_values(values);
    let categorical = slot.get("is_categorical").and_then(Value::as_bool).unwrap_or(false);
    let mut spec = SlotSpec::new(name, SlotKind::FreeText, description).map_err(|e| fail(record, e.to_string()))?;
    if categorical && !values.is_empty() {
        spec.kind = SlotKind::Categorical;
        spec.allowed_values = Some(values);
    }
    Ok(spec)
}

fn ingest_sgd(doc: &Value) -> Result<Ingested, IngestError> {
    let services = array_field(doc, "schema", "document")?;
    let raw_dialogues = array_field(doc, "dialogues", "document")?;
    let mut catalog = SchemaCatalog::new();
    let mut warnings = Vec::new();

    for (i, service) in services.iter().enumerate() {
        let record = format!("schema[{i}]");
        let service_name = str_field(service, "service_name", &record)?;
        let slots = array_field(service, "slots", &record)?
            .iter()
            .map(|s| sgd_slot(s, &record))
            .collect::<Result<Vec<_>, _>>()?;
        let service_desc = service.get("description").and_then(Value::as_str).unwrap_or("");
        let intents = service
            .get("intents")
            .and_then(Value::as_array)
            .cloned()
            .unwrap_or_default();
        if intents.is_empty() {
            add_schema(
                &mut catalog,
                &mut warnings,
                ApiSchema::new(service_name, service_desc, slots.clone()).map_err(|e| e.to_string()),
            );
            continue;
        }
        for intent in &intents {
            let intent_name = str_field(intent, "name", &record)?;
            let desc = intent
                .get("description")
                .and_then(Value::as_str)
                .unwrap_or(service_desc);
            let required: Vec<String> = intent
                .get("required_slots")
                .and_then(Value::as_array)
                .map(|a| a.iter().filter_map(|v| v.as_str().map(str::to_string)).collect())
                .unwrap_or_default();
            let optional: Vec<String> = intent
                .get("optional_slots")
                .and_then(Value::as_object)
                .map(|o| o.keys().cloned().collect())
                .unwrap_or_default();
            let mut intent_slots = Vec::new();
            for (names, is_required) in [(&required, true), (&optional, false)] {
                for name in names {
                    let key = canonicalize_key(name).map_err(|e| fail(&record, e.to_string()))?;
                    let Some(spec) = slots.iter().find(|s| s.name == key) else {
                        return Err(fail(
                            &record,
                            format!("intent {intent_name:?} names unknown slot {name:?}"),
                        ));
                    };
                    if intent_slots.iter().any(|s: &SlotSpec| s.name == key) {
                        continue;
                    }
                    let mut spec = spec.clone();
                    spec.required = is_required;
                    intent_slots.push(spec);
                }
            }
            add_schema(
                &mut catalog,
                &mut warnings,
                ApiSchema::new(&format!("{service_name}.{intent_name}"), desc, intent_slots).map_err(|e| e.to_string()),
            );
        }
    }

    let mut dialogues = Vec::new();
    for (i, raw) in raw_dialogues.iter().enumerate() {
        let record = format!("dialogues[{i}]");
        let dialogue_id = str_field(raw, "dialogue_id", &record)?;
        let turns = array_field(raw, "turns", &record)?;
        let mut history = Vec::new();
        for (t, turn) in turns.iter().enumerate() {
            let turn_record = format!("{record}.turns[{t}]");
            let speaker = match str_field(turn, "speaker", &turn_record)? {
                "USER" | "user" => Speaker::User,
                "SYSTEM" | "system" => Speaker::Agent,
                other => return Err(fail(turn_record, format!("unknown speaker {other:?}"))),
            };
            let utterance = str_field(turn, "utterance", &turn_record)?;
            let frames = turn
                .get("frames")
                .and_then(Value::as_array)
                .cloned()
                .unwrap_or_default();
            for frame in &frames {
                let Some(call) = frame.get("service_call") else {
                    continue;
                };
                let service = str_field(frame, "service", &turn_record)?;
                let method = str_field(call, "method", &turn_record)?;
                let id = format!("{dialogue_id}:{t}");
                let params = call.get("parameters").and_then(Value::as_object);
                let api = format!("{service}.{method}");
                match sgd_gold(params, catalog.get(&api)) {
                    Ok(gold) if !history.is_empty() => dialogues.push(Dialogue {
                        id,
                        domain: domain_of(service),
                        target_api: api,
                        turns: history.clone(),
                        gold_arguments: gold,
                    }),
                    Ok(_) => warnings.push(format!("{id}: service call before any turn; skipped")),
                    Err(reason) => warnings.push(format!("{id}: {reason}; skipped")),
                }
            }
            if !utterance.trim().is_empty() {
                history.push(DialogueTurn {
                    speaker,
                    utterance: utterance.to_string(),
                });
            }
        }
    }
    Ok(Ingested {
        dialogues,
        catalog,
        warnings,
    })
}

fn sgd_gold(
    params: Option<&serde_json::Map<String, Value>>,
    schema: Option<&ApiSchema>,
) -> Result<ArgumentMap, String> {
    let schema = schema.ok_or("service call names an unknown api")?;
    let params = params.filter(|p| !p.is_empty()).ok_or("no slot annotations")?;
    let mut gold = ArgumentMap::new();
    for (k, v) in params {
        let text = scalar_text(v).ok_or_else(|| format!("non-scalar value for {k:?}"))?;
        gold.insert(k, &text).map_err(|e| e.to_string())?;
    }
    if let Some(k) = gold.keys().find(|k| schema.slot(k).is_none()) {
        return Err(format!("argument {k:?} not in schema {:?}", schema.api_name));
    }
    Ok(gold.in_schema_order(schema))
}

fn star_kind(type_name: &str) -> SlotKind {
    match type_name.to_ascii_lowercase().as_str() {
        "integer" | "int" | "number" => SlotKind::Integer,
        "boolean" | "bool" => SlotKind::Boolean,
        "categorical" | "enum" => SlotKind::Categorical,
        "date" => SlotKind::Date,
        "time" => SlotKind::Time,
        _ => SlotKind::FreeText,
    }
}

fn star_api(api: &Value, record: &str) -> Result<Result<ApiSchema, String>, IngestError> {
    let name = str_field(api, "name", record)?;
    let description = api.get("description").and_then(Value::as_str).unwrap_or("");
    let required_list: Vec<&str> = api
        .get("required")
        .and_then(Value::as_array)
        .map(|a| a.iter().filter_map(Value::as_str).collect())
        .unwrap_or_default();
    let mut slots = Vec::new();
    for input in array_field(api, "input", record)? {
        let spec = match input {
            Value::String(slot_name) => {
                let mut s =
                    SlotSpec::new(slot_name, SlotKind::FreeText, "").map_err(|e| fail(record, e.to_string()))?;
                if !required_list.is_empty() {
                    s.required = required_list.contains(&slot_name.as_str());
                }
                s
            }
            Value::Object(_) => {
                let slot_name = input
                    .get("Name")
                    .or_else(|| input.get("name"))
                    .and_then(Value::as_str)
                    .ok_or_else(|| fail(record, "input without Name"))?;
                let kind = input
                    .get("Type")
                    .or_else(|| input.get("type"))
                    .and_then(Value::as_str)
                    .map(star_kind)
                    .unwrap_or(SlotKind::FreeText);
                let desc = input
                    .get("Description")
                    .or_else(|| input.get("description"))
                    .and_then(Value::as_str)
                    .unwrap_or("");
                let values = dedup_values(
                    input
                        .get("PossibleValues")
                        .or_else(|| input.get("possible_values"))
                        .and_then(Value::as_array)
                        .map(|a| a.iter().filter_map(scalar_text).collect())
                        .unwrap_or_default(),
                );
                let mut s = SlotSpec::new(slot_name, kind, desc).map_err(|e| fail(record, e.to_string()))?;
                if !values.is_empty() {
                    s.kind = SlotKind::Categorical;
                    s.allowed_values = Some(values);
                }
                s.required = input
                    .get("Required")
                    .or_else(|| input.get("required"))
                    .and_then(Value::as_bool)
                    .unwrap_or(required_list.is_empty() || required_list.contains(&slot_name));
                s
            }
            _ => return Err(fail(record, "input must be a string or object")),
        };
        slots.push(spec);
    }
    Ok(ApiSchema::new(name, description, slots).map_err(|e| e.to_string()))
}

fn ingest_star(doc: &Value) -> Result<Ingested, IngestError> {
    let apis = array_field(doc, "apis", "document")?;
    let raw_dialogues = array_field(doc, "dialogues", "document")?;
    let mut catalog = SchemaCatalog::new();
    let mut warnings = Vec::new();
    for (i, api) in apis.iter().enumerate() {
        let candidate = star_api(api, &format!("apis[{i}]"))?;
        add_schema(&mut catalog, &mut warnings, candidate);
    }

    let mut dialogues = Vec::new();
    for (i, raw) in raw_dialogues.iter().enumerate() {
        let record = format!("dialogues[{i}]");
        let dialogue_id = raw
            .get("DialogueID")
            .and_then(scalar_text)
            .ok_or_else(|| fail(&record, "missing DialogueID"))?;
        let scenario_domain = raw
            .pointer("/Scenario/Domains/0")
            .and_then(Value::as_str)
            .map(str::to_lowercase);
        let events = array_field(raw, "Events", &record)?;
        let mut history = Vec::new();
        for (e, event) in events.iter().enumerate() {
            let event_record = format!("{record}.Events[{e}]");
            let agent = str_field(event, "Agent", &event_record)?;
            let action = event.get("Action").and_then(Value::as_str).unwrap_or("");
            let speaker = match agent {
                "User" => Speaker::User,
                "Wizard" => Speaker::Agent,
                // knowledge-base replies and the like carry no dialogue text
                _ => continue,
            };
            match action {
                "utter" | "pick_suggestion" => {
                    if let Some(text) = event
                        .get("Text")
                        .and_then(Value::as_str)
                        .filter(|t| !t.trim().is_empty())
                    {
                        history.push(DialogueTurn {
                            speaker,
                            utterance: text.to_string(),
                        });
                    }
                }
                "query" => {
                    let api = str_field(event, "API", &event_record)?;
                    let id = format!("{dialogue_id}:{e}");
                    match star_gold(event.get("Constraints"), catalog.get(api)) {
                        Ok(gold) if !history.is_empty() => dialogues.push(Dialogue {
                            id,
                            domain: scenario_domain.clone().unwrap_or_else(|| domain_of(api)),
                            target_api: api.to_string(),
                            turns: history.clone(),
                            gold_arguments: gold,
                        }),
                        Ok(_) => warnings.push(format!("{id}: query before any turn; skipped")),
                        Err(reason) => warnings.push(format!("{id}: {reason}; skipped")),
                    }
                }
                _ => {}
            }
        }
    }
    Ok(Ingested {
        dialogues,
        catalog,
        warnings,
    })
}

fn star_gold(constraints: Option<&Value>, schema: Option<&ApiSchema>) -> Result<ArgumentMap, String> {
    let schema = schema.ok_or("query names an unknown api")?;
    let list = constraints
        .and_then(Value::as_array)
        .filter(|a| !a.is_empty())
        .ok_or("no slot annotations")?;
    let mut gold = ArgumentMap::new();
    for c in list {
        let obj = c.as_object().ok_or("constraint is not an object")?;
        for (k, v) in obj {
            let text = scalar_text(v).ok_or_else(|| format!("non-scalar value for {k:?}"))?;
            gold.insert(k, &text).map_err(|e| e.to_string())?;
        }
    }
    if let Some(k) = gold.keys().find(|k| schema.slot(k).is_none()) {
        return Err(format!("argument {k:?} not in schema {:?}", schema.api_name));
    }
    Ok(gold.in_schema_order(schema))
}
