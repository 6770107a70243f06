use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde_json::json;

use arground_core::exec::map_bounded;
use arground_core::generation::{Backend, BackendSpec, GenerationError, GenerationRequest};
use arground_core::ingest::{ingest_external, ExternalFormat};
use arground_core::metrics::REPORT_CSV_HEADER;
use arground_core::prompting::PromptError;
use arground_core::report::{emit_error_panel, records_from_jsonl, records_to_jsonl, GroupBy};
use arground_core::sampler::{examples_to_jsonl, export_sft_dataset, SamplerError};
use arground_core::schema::{
    dialogues_to_jsonl, load_dialogues, load_schema_catalog, read_dialogues, serialize_schema_catalog,
};
use arground_core::split::{split_in_domain, split_out_of_domain, Split};
use arground_core::{
    classify_errors, evaluate_corpus, extract_argument_map, rejection_sample, run_multistep, ApiSchema, ArgumentMap,
    Dialogue, Execution, PredictionRecord, PromptBuilder, SamplerConfig, SchemaCatalog,
};

use crate::args::{
    BackendArgs, DataArgs, EvaluateArgs, ExportSftArgs, FillArgs, FillMode, Format, Group, IngestArgs,
    RejectSampleArgs, ReportArgs, SplitArgs, SplitIo, SplitKind,
};
use crate::artifact::{sidecar, write_atomic, write_meta, Inputs};
use crate::Failure;

fn data(e: impl std::fmt::Display) -> Failure {
    Failure::Data(e.to_string())
}

fn generation_failure(e: GenerationError) -> Failure {
    match e {
        GenerationError::InvalidSpec(_) => Failure::Usage(e.to_string()),
        GenerationError::LogCorrupt { .. } | GenerationError::Io(_) => Failure::Data(e.to_string()),
        GenerationError::Backend(_) | GenerationError::Auth(_) | GenerationError::ReplayMiss(_) => {
            Failure::Backend(e.to_string())
        }
    }
}

fn prompt_failure(dialogue: &str, e: PromptError) -> Failure {
    let message = format!("dialogue {dialogue:?}: {e}");
    match e {
        PromptError::Backend { .. } => Failure::Backend(message),
        _ => Failure::Data(message),
    }
}

fn sampler_failure(e: SamplerError) -> Failure {
    match e {
        SamplerError::Backend { .. }
        | SamplerError::Prompt {
            source: PromptError::Backend { .. },
            ..
        } => Failure::Backend(e.to_string()),
        _ => Failure::Data(e.to_string()),
    }
}

fn load_data(args: &DataArgs, inputs: &mut Inputs) -> Result<(SchemaCatalog, Vec<Dialogue>), Failure> {
    let catalog = load_schema_catalog(&inputs.read(&args.schemas)?)
        .map_err(|e| Failure::Data(format!("{}: {e}", args.schemas.display())))?;
    let dialogues = load_dialogues(&inputs.read(&args.dialogues)?, &catalog)
        .map_err(|e| Failure::Data(format!("{}: {e}", args.dialogues.display())))?;
    Ok((catalog, dialogues))
}

fn open_backend(args: &BackendArgs, inputs: &mut Inputs) -> Result<(BackendSpec, Box<dyn Backend>), Failure> {
    let spec: BackendSpec = args.backend.parse().map_err(generation_failure)?;
    if let Some(path) = spec.input_file() {
        inputs.note(path)?;
    }
    let backend = spec.build(args.in_flight.max(1)).map_err(generation_failure)?;
    Ok((spec, backend))
}

fn schema_of<'a>(catalog: &'a SchemaCatalog, d: &Dialogue) -> &'a ApiSchema {
    // load_dialogues has already checked every target_api
    &catalog[&d.target_api]
}

pub fn export_sft(args: ExportSftArgs) -> Result<(), Failure> {
    let mut inputs = Inputs::default();
    let (catalog, dialogues) = load_data(&args.data, &mut inputs)?;
    let prompts = PromptBuilder::default();
    let examples = export_sft_dataset(&dialogues, &catalog, &prompts).map_err(sampler_failure)?;
    write_atomic(&args.out, examples_to_jsonl(&examples).as_bytes())?;
    write_meta(
        &args.out,
        "export-sft",
        json!({}),
        Some(prompts.template_hash()),
        &inputs,
    )
}

pub fn reject_sample(args: RejectSampleArgs) -> Result<(), Failure> {
    let mut inputs = Inputs::default();
    let (catalog, dialogues) = load_data(&args.data, &mut inputs)?;
    if args.k == 0 {
        return Err(Failure::Usage("--k must be at least 1".into()));
    }
    let (spec, backend) = open_backend(&args.backend, &mut inputs)?;
    let prompts = PromptBuilder::default();
    let config = SamplerConfig {
        k: args.k,
        temperature: args.temperature,
        max_tokens: args.max_tokens,
        strict: args.strict,
        workers: args.backend.in_flight.max(1),
    };
    let (examples, stats) =
        rejection_sample(backend.as_ref(), &dialogues, &catalog, &prompts, &config).map_err(sampler_failure)?;
    write_atomic(&args.out, examples_to_jsonl(&examples).as_bytes())?;
    let mut stats_text = serde_json::to_string_pretty(&stats).expect("stats serialize");
    stats_text.push('\n');
    write_atomic(&sidecar(&args.out, "stats.json"), stats_text.as_bytes())?;
    // worker count does not change the output, so it stays out of the hash
    let config = json!({
        "backend": spec.to_string(),
        "k": config.k,
        "temperature": config.temperature,
        "max_tokens": config.max_tokens,
        "strict": config.strict,
    });
    write_meta(
        &args.out,
        "reject-sample",
        config,
        Some(prompts.template_hash()),
        &inputs,
    )
}

fn fill_one(
    mode: FillMode,
    backend: &dyn Backend,
    prompts: &PromptBuilder,
    schema: &ApiSchema,
    dialogue: &Dialogue,
) -> Result<PredictionRecord, Failure> {
    let mut record = PredictionRecord::new(dialogue.id.clone(), ArgumentMap::new());
    match mode {
        FillMode::Default => {
            let bundle = prompts
                .build_default_prompt(schema, dialogue)
                .map_err(|e| prompt_failure(&dialogue.id, e))?;
            let request = GenerationRequest::new(bundle.text).with_tag(dialogue.id.clone());
            let generated = backend.generate(&request).map_err(|e| match generation_failure(e) {
                Failure::Backend(m) => Failure::Backend(format!("dialogue {:?}: {m}", dialogue.id)),
                other => other,
            })?;
            let raw = generated.outputs.into_iter().next().unwrap_or_default();
            match extract_argument_map(&raw) {
                Ok(parsed) => {
                    record.arguments = parsed.map;
                    record.warnings = parsed.warnings;
                }
                Err(e) => record.warnings.push(format!("unparseable output: {e}")),
            }
            record.raw = Some(raw);
        }
        FillMode::Multistep => {
            let outcome =
                run_multistep(backend, prompts, schema, dialogue).map_err(|e| prompt_failure(&dialogue.id, e))?;
            record.arguments = outcome.map;
            record.warnings = outcome.warnings;
        }
    }
    let breakdown = classify_errors(&record.arguments, &dialogue.gold_arguments, schema)
        .map_err(|e| Failure::Data(format!("dialogue {:?}: {e}", dialogue.id)))?;
    record.breakdown = Some(breakdown);
    Ok(record)
}

pub fn fill(args: FillArgs) -> Result<(), Failure> {
    let mut inputs = Inputs::default();
    let (catalog, dialogues) = load_data(&args.data, &mut inputs)?;
    let (spec, backend) = open_backend(&args.backend, &mut inputs)?;
    let prompts = PromptBuilder::default();
    let model = args.model.clone().unwrap_or_else(|| spec.kind().to_string());

    let results = map_bounded(&dialogues, args.backend.in_flight, |d| {
        fill_one(args.mode, backend.as_ref(), &prompts, schema_of(&catalog, d), d)
    });
    let mut records = Vec::with_capacity(results.len());
    for r in results {
        let mut r = r?;
        r.model = Some(model.clone());
        r.split = args.split.clone();
        records.push(r);
    }
    write_atomic(&args.out, records_to_jsonl(&records).as_bytes())?;
    let mode = match args.mode {
        FillMode::Default => "default",
        FillMode::Multistep => "multistep",
    };
    let config = json!({
        "mode": mode,
        "backend": spec.to_string(),
        "model": model,
        "split": args.split,
    });
    write_meta(&args.out, "fill", config, Some(prompts.template_hash()), &inputs)
}

/// The prediction's argument map, parsing `raw` when no map was stored.
fn predicted_map(record: &PredictionRecord) -> ArgumentMap {
    if !record.arguments.is_empty() {
        return record.arguments.clone();
    }
    match record.raw.as_deref().map(extract_argument_map) {
        Some(Ok(parsed)) => parsed.map,
        Some(Err(e)) => {
            log::warn!("prediction {:?}: unparseable output ({e}); scored as empty", record.id);
            ArgumentMap::new()
        }
        None => ArgumentMap::new(),
    }
}

pub fn evaluate(args: EvaluateArgs) -> Result<(), Failure> {
    let mut inputs = Inputs::default();
    let gold_data = DataArgs {
        dialogues: args.gold.clone(),
        schemas: args.schemas.clone(),
    };
    let (catalog, gold) = load_data(&gold_data, &mut inputs)?;
    let preds = records_from_jsonl(&inputs.read_string(&args.pred)?)
        .map_err(|(line, e)| Failure::Data(format!("{} line {line}: {e}", args.pred.display())))?;

    let mut by_id: HashMap<&str, &PredictionRecord> = HashMap::new();
    for p in &preds {
        if by_id.insert(p.id.as_str(), p).is_some() {
            return Err(Failure::Data(format!("duplicate prediction id {:?}", p.id)));
        }
    }
    let gold_ids: BTreeSet<&str> = gold.iter().map(|d| d.id.as_str()).collect();
    if let Some(p) = preds.iter().find(|p| !gold_ids.contains(p.id.as_str())) {
        return Err(Failure::Data(format!("prediction {:?} has no gold dialogue", p.id)));
    }

    let mut pairs = Vec::with_capacity(gold.len());
    let mut breakdowns = Vec::with_capacity(gold.len());
    let mut scored = Vec::with_capacity(gold.len());
    for d in &gold {
        let (pred, mut record) = match by_id.get(d.id.as_str()) {
            Some(p) => (predicted_map(p), (*p).clone()),
            None => {
                log::warn!("no prediction for dialogue {:?}; scored as empty", d.id);
                (
                    ArgumentMap::new(),
                    PredictionRecord::new(d.id.clone(), ArgumentMap::new()),
                )
            }
        };
        let breakdown = classify_errors(&pred, &d.gold_arguments, schema_of(&catalog, d))
            .map_err(|e| Failure::Data(format!("dialogue {:?}: {e}", d.id)))?;
        record.arguments = pred.clone();
        record.breakdown = Some(breakdown.clone());
        record.split.get_or_insert_with(|| args.split.clone());
        pairs.push((pred, d.gold_arguments.clone()));
        breakdowns.push(breakdown);
        scored.push(record);
    }

    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let report = evaluate_corpus(&pairs, &breakdowns, exec).map_err(data)?;
    let dataset = args.dataset.clone().unwrap_or_else(|| {
        args.gold
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into())
    });
    let csv = format!(
        "{REPORT_CSV_HEADER}\n{}\n",
        report.csv_row(&dataset, &args.split, &args.backend)
    );
    write_atomic(&args.out, csv.as_bytes())?;
    if let Some(path) = &args.breakdowns_out {
        write_atomic(path, records_to_jsonl(&scored).as_bytes())?;
    }
    let config = json!({
        "dataset": dataset,
        "split": args.split,
        "backend": args.backend,
    });
    write_meta(&args.out, "evaluate", config, None, &inputs)
}

fn write_split(io: &SplitIo, split: &Split, config: serde_json::Value, inputs: &Inputs) -> Result<(), Failure> {
    for w in &split.warnings {
        log::warn!("{w}");
    }
    write_atomic(
        &io.out_dir.join("train.jsonl"),
        dialogues_to_jsonl(&split.train).as_bytes(),
    )?;
    write_atomic(
        &io.out_dir.join("test.jsonl"),
        dialogues_to_jsonl(&split.test).as_bytes(),
    )?;
    let manifest_path = io.out_dir.join("manifest.json");
    let mut manifest = serde_json::to_string_pretty(&split.manifest).expect("manifest serializes");
    manifest.push('\n');
    write_atomic(&manifest_path, manifest.as_bytes())?;
    write_meta(&manifest_path, "split", config, None, inputs)
}

pub fn split(args: SplitArgs) -> Result<(), Failure> {
    let mut inputs = Inputs::default();
    match args.kind {
        SplitKind::InDomain { io, fraction, seed } => {
            let dialogues = read_dialogues(&inputs.read(&io.dialogues)?).map_err(data)?;
            let split = split_in_domain(&dialogues, fraction, seed).map_err(data)?;
            let config = json!({"kind": "in-domain", "fraction": fraction, "seed": seed});
            write_split(&io, &split, config, &inputs)
        }
        SplitKind::OutOfDomain { io, holdout, synonyms } => {
            let dialogues = read_dialogues(&inputs.read(&io.dialogues)?).map_err(data)?;
            let synonyms: Option<BTreeMap<String, String>> = match &synonyms {
                Some(path) => Some(
                    serde_json::from_slice(&inputs.read(path)?)
                        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?,
                ),
                None => None,
            };
            let holdout: BTreeSet<String> = holdout
                .iter()
                .map(|d| d.trim().to_string())
                .filter(|d| !d.is_empty())
                .collect();
            let split = split_out_of_domain(&dialogues, &holdout, synonyms.as_ref()).map_err(data)?;
            let config = json!({"kind": "out-of-domain", "holdout": holdout, "synonyms": synonyms});
            write_split(&io, &split, config, &inputs)
        }
    }
}

pub fn report(args: ReportArgs) -> Result<(), Failure> {
    let mut inputs = Inputs::default();
    let records = records_from_jsonl(&inputs.read_string(&args.breakdowns)?)
        .map_err(|(line, e)| Failure::Data(format!("{} line {line}: {e}", args.breakdowns.display())))?;
    let group_by = match args.group_by {
        Group::Model => GroupBy::Model,
        Group::Split => GroupBy::Split,
    };
    let csv = emit_error_panel(&records, group_by).map_err(data)?;
    write_atomic(&args.out, csv.as_bytes())?;
    let group = match group_by {
        GroupBy::Model => "model",
        GroupBy::Split => "split",
    };
    write_meta(&args.out, "report", json!({"group_by": group}), None, &inputs)
}

pub fn ingest(args: IngestArgs) -> Result<(), Failure> {
    let mut inputs = Inputs::default();
    let format = match args.format {
        Format::Sgd => ExternalFormat::Sgd,
        Format::Star => ExternalFormat::Star,
    };
    let ingested = ingest_external(&inputs.read(&args.dump)?, format).map_err(data)?;
    for w in &ingested.warnings {
        log::warn!("{w}");
    }
    let dialogues_path = args.out_dir.join("dialogues.jsonl");
    write_atomic(&dialogues_path, dialogues_to_jsonl(&ingested.dialogues).as_bytes())?;
    let mut schemas = serialize_schema_catalog(&ingested.catalog);
    schemas.push('\n');
    write_atomic(&args.out_dir.join("schemas.json"), schemas.as_bytes())?;
    let name = match args.format {
        Format::Sgd => "sgd",
        Format::Star => "star",
    };
    write_meta(&dialogues_path, "ingest", json!({"format": name}), None, &inputs)
}
