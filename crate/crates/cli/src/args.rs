use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "arground",
    version,
    about = "Grounded API argument filling: prompts, scoring, sampling, evaluation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write gold prompt/completion pairs for supervised fine-tuning.
    ExportSft(ExportSftArgs),
    /// Sample K candidates per dialogue and keep those with positive reward.
    RejectSample(RejectSampleArgs),
    /// Predict arguments for each dialogue and score them against gold.
    Fill(FillArgs),
    /// Corpus metrics for a predictions file against gold dialogues.
    Evaluate(EvaluateArgs),
    /// Build a train/test split.
    Split(SplitArgs),
    /// Per-group error-rate panel from scored predictions.
    Report(ReportArgs),
    /// Convert an external dataset dump into dialogues and schemas.
    Ingest(IngestArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Dialogues, one JSON object per line.
    #[arg(long)]
    pub dialogues: PathBuf,
    /// Schema catalog, a JSON array of API schemas.
    #[arg(long)]
    pub schemas: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExportSftArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BackendArgs {
    /// http:<profile>, mock:<script>, replay:<log> or record:<log>.
    #[arg(long)]
    pub backend: String,
    /// Maximum concurrent backend requests.
    #[arg(long, default_value_t = arground_core::generation::limit::DEFAULT_IN_FLIGHT)]
    pub in_flight: usize,
}

#[derive(Debug, Args)]
pub struct RejectSampleArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub backend: BackendArgs,
    #[arg(long, default_value_t = arground_core::sampler::DEFAULT_K)]
    pub k: u32,
    #[arg(long, default_value_t = arground_core::sampler::DEFAULT_TEMPERATURE)]
    pub temperature: f64,
    #[arg(long, default_value_t = arground_core::generation::DEFAULT_MAX_TOKENS)]
    pub max_tokens: u32,
    /// Fail on the first backend error instead of skipping the dialogue.
    #[arg(long)]
    pub strict: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FillMode {
    Default,
    Multistep,
}

#[derive(Debug, Args)]
pub struct FillArgs {
    #[arg(long, value_enum, default_value_t = FillMode::Default)]
    pub mode: FillMode,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub backend: BackendArgs,
    /// Model label stored on each prediction (defaults to the backend kind).
    #[arg(long)]
    pub model: Option<String>,
    /// Split label stored on each prediction.
    #[arg(long)]
    pub split: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Predictions, one JSON record per line.
    #[arg(long)]
    pub pred: PathBuf,
    /// Gold dialogues, one JSON object per line.
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long)]
    pub schemas: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the predictions with their error breakdowns here.
    #[arg(long)]
    pub breakdowns_out: Option<PathBuf>,
    /// Dataset label for the CSV row (defaults to the gold file stem).
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long, default_value = "test")]
    pub split: String,
    #[arg(long, default_value = "unknown")]
    pub backend: String,
    /// Score on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[command(subcommand)]
    pub kind: SplitKind,
}

#[derive(Debug, Args)]
pub struct SplitIo {
    #[arg(long)]
    pub dialogues: PathBuf,
    /// Receives train.jsonl, test.jsonl and manifest.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum SplitKind {
    /// Stratified random split; every domain appears on both sides.
    InDomain {
        #[command(flatten)]
        io: SplitIo,
        #[arg(long)]
        fraction: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Hold out whole domains (plus their synonyms) for testing.
    OutOfDomain {
        #[command(flatten)]
        io: SplitIo,
        #[arg(long, value_delimiter = ',', required = true)]
        holdout: Vec<String>,
        /// JSON object mapping a domain to a related domain.
        #[arg(long)]
        synonyms: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Group {
    Model,
    Split,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Scored predictions (from `fill` or `evaluate --breakdowns-out`).
    #[arg(long)]
    pub breakdowns: PathBuf,
    #[arg(long, value_enum)]
    pub group_by: Group,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Sgd,
    Star,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long, value_enum)]
    pub format: Format,
    #[arg(long)]
    pub dump: PathBuf,
    /// Receives dialogues.jsonl and schemas.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}
