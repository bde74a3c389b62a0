use std::path::PathBuf;

use absa_core::corpus::{InvalidRowPolicy, OverlapPolicy, PolarityCodes};
use absa_core::ensemble::TieBreak;
use absa_core::soe::ContextMode;
use absa_core::splits::SplitStrategy;
use absa_core::tagging::AlignmentPolicy;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "absa",
    version,
    about = "Aspect-based sentiment analysis toolkit"
)]
#[command(args_override_self = true)]
pub struct Cli {
    /// JSON config file; its values sit under command-line flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads (1 = sequential). Never changes output content.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Delimited rows (one per aspect) to corpus JSON lines.
    Convert(ConvertArgs),
    /// Corpus statistics as JSON.
    Stats(StatsArgs),
    /// Corpus to CoNLL-style BIO tags.
    Tag(TagArgs),
    /// Leakage-free train/test split.
    Split(SplitArgs),
    /// Aspect categories and target-swap augmentation.
    #[command(subcommand)]
    Augment(AugmentCommand),
    /// SOE model inputs (prompts or sentence pairs).
    Prompt(PromptArgs),
    /// Combine several models' predictions.
    #[command(subcommand)]
    Ensemble(EnsembleCommand),
    /// Score predictions against gold.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Train or apply the desk-scale baseline models.
    #[command(subcommand)]
    Baseline(BaselineCommand),
    /// Check prediction interchange files.
    #[command(subcommand)]
    Validate(ValidateCommand),
    /// Write the bundled synthetic toy corpus.
    Toy(ToyArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct OutArg {
    /// Output file (standard output when omitted).
    #[arg(long = "out", short = 'o', value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct CorpusArg {
    /// Corpus JSON lines.
    #[arg(long, env = "ABSA_CORPUS", value_name = "FILE")]
    pub corpus: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    Tsv,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowPolicy {
    Reject,
    Skip,
}

impl From<RowPolicy> for InvalidRowPolicy {
    fn from(p: RowPolicy) -> Self {
        match p {
            RowPolicy::Reject => InvalidRowPolicy::Reject,
            RowPolicy::Skip => InvalidRowPolicy::Skip,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Overlaps {
    Reject,
    KeepLonger,
}

impl From<Overlaps> for OverlapPolicy {
    fn from(p: Overlaps) -> Self {
        match p {
            Overlaps::Reject => OverlapPolicy::Reject,
            Overlaps::KeepLonger => OverlapPolicy::KeepLonger,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alignment {
    Expand,
    Strict,
}

impl From<Alignment> for AlignmentPolicy {
    fn from(p: Alignment) -> Self {
        match p {
            Alignment::Expand => AlignmentPolicy::Expand,
            Alignment::Strict => AlignmentPolicy::Strict,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct ConvertArgs {
    /// Delimited input file.
    #[arg(long = "in", short = 'i', env = "ABSA_INPUT", value_name = "FILE")]
    pub input: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArg,
    #[arg(long, value_enum, default_value = "tsv")]
    pub format: InputKind,
    /// Column names: id,review,polarity,aspect,start,end.
    #[arg(long, value_name = "NAMES")]
    pub columns: Option<String>,
    /// Polarity codes as negative,neutral,positive.
    #[arg(long, default_value = "-1,0,1", allow_hyphen_values = true)]
    pub codes: PolarityCodes,
    /// End offsets in the file are inclusive.
    #[arg(long)]
    pub end_inclusive: bool,
    #[arg(long, value_enum, default_value = "reject")]
    pub invalid_rows: RowPolicy,
    #[arg(long, value_enum, default_value = "reject")]
    pub overlaps: Overlaps,
}

#[derive(Args, Debug, Serialize)]
pub struct StatsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub corpus: CorpusArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArg,
    #[arg(long, default_value_t = 15)]
    pub top_k: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct TagArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub corpus: CorpusArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArg,
    /// How spans that cut through a token are aligned.
    #[arg(long, value_enum, default_value = "expand")]
    pub alignment: Alignment,
}

#[derive(Args, Debug, Serialize)]
pub struct SplitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub corpus: CorpusArg,
    #[arg(long, value_name = "FILE")]
    pub train_out: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub test_out: PathBuf,
    /// Balance report as JSON (standard output when omitted).
    #[arg(long, value_name = "FILE")]
    pub report_out: Option<PathBuf>,
    /// random | polarity | polarity-aspect
    #[arg(long, default_value = "polarity-aspect")]
    pub strategy: SplitStrategy,
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AugmentCommand {
    /// Cluster aspect terms into categories by their contexts.
    InferCategories(InferArgs),
    /// Replace aspect terms with others from the same category.
    TargetSwap(SwapArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct InferArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub corpus: CorpusArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArg,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Context words on each side of a span.
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SwapOutput {
    /// One augmentation record per line.
    Examples,
    /// Augmented reviews as corpus JSON lines.
    Corpus,
}

#[derive(Args, Debug, Serialize)]
pub struct SwapArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub corpus: CorpusArg,
    /// Category map JSON: {"category": ["term", ...]}.
    #[arg(long, env = "ABSA_CATEGORIES", value_name = "FILE")]
    pub categories: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArg,
    #[arg(long, default_value_t = 1)]
    pub per_example: usize,
    #[arg(long, value_enum, default_value = "examples")]
    pub emit: SwapOutput,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromptFormat {
    Prompt,
    Pair,
}

#[derive(Args, Debug, Serialize)]
pub struct PromptArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub corpus: CorpusArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArg,
    #[arg(long, value_enum, default_value = "prompt")]
    pub format: PromptFormat,
    /// full | sentence
    #[arg(long, default_value = "full")]
    pub context: ContextMode,
    /// Separator for the pair format.
    #[arg(long, default_value = absa_core::soe::DEFAULT_SEPARATOR)]
    pub separator: String,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleCommand {
    /// Per-token median of label probabilities.
    Ate(EnsembleAteArgs),
    /// Majority vote over polarity labels.
    Soe(EnsembleSoeArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct EnsembleAteArgs {
    /// ATE prediction files (records of several models may share a file).
    #[arg(long, required = true, num_args = 1.., value_name = "FILE")]
    pub pred: Vec<PathBuf>,
    /// Check token offsets against this corpus.
    #[arg(long, env = "ABSA_CORPUS", value_name = "FILE")]
    pub corpus: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug, Serialize)]
pub struct EnsembleSoeArgs {
    #[arg(long, required = true, num_args = 1.., value_name = "FILE")]
    pub pred: Vec<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArg,
    /// Label precedence for ties, e.g. positive,negative,neutral.
    #[arg(long, default_value = "positive,negative,neutral")]
    pub tie_break: TieBreak,
    #[arg(long, default_value = "ensemble")]
    pub model_id: String,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalCommand {
    /// Token-level (and span exact-match) ATE scores.
    Ate(EvalAteArgs),
    /// SOE accuracy, macro F1 and balanced accuracy.
    Soe(EvalSoeArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct EvalAteArgs {
    /// Gold corpus JSON lines or CoNLL.
    #[arg(long, value_name = "FILE")]
    pub gold: PathBuf,
    /// Corpus, CoNLL, ATE records (one model) or `ensemble ate` output.
    #[arg(long, value_name = "FILE")]
    pub pred: PathBuf,
    #[arg(long, value_enum, default_value = "expand")]
    pub alignment: Alignment,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArg,
    /// Also append a one-line CSV summary to this file.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    #[arg(long, default_value = "run")]
    pub run_name: String,
}

#[derive(Args, Debug, Serialize)]
pub struct EvalSoeArgs {
    /// Gold corpus or prompt file with gold labels.
    #[arg(long, value_name = "FILE")]
    pub gold: PathBuf,
    /// SOE records of one model (or `ensemble soe` output).
    #[arg(long, value_name = "FILE")]
    pub pred: PathBuf,
    /// Select one model from a file holding several.
    #[arg(long)]
    pub model_id: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArg,
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    #[arg(long, default_value = "run")]
    pub run_name: String,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Ate,
    Soe,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineCommand {
    Train(TrainArgs),
    Predict(PredictArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub task: Task,
    #[command(flatten)]
    #[serde(flatten)]
    pub corpus: CorpusArg,
    /// Model JSON.
    #[arg(long, env = "ABSA_MODEL", value_name = "FILE")]
    pub model: PathBuf,
    /// Perceptron passes over the data (ate).
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    /// Train on a seeded bootstrap resample (soe).
    #[arg(long)]
    pub bootstrap: bool,
    /// SOE input context (soe).
    #[arg(long, default_value = "sentence")]
    pub context: ContextMode,
    #[arg(long, value_enum, default_value = "expand")]
    pub alignment: Alignment,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct PredictArgs {
    #[arg(long, value_enum)]
    pub task: Task,
    #[command(flatten)]
    #[serde(flatten)]
    pub corpus: CorpusArg,
    #[arg(long, env = "ABSA_MODEL", value_name = "FILE")]
    pub model: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArg,
    /// model_id written into every record.
    #[arg(long, default_value = "baseline")]
    pub model_id: String,
    #[arg(long, default_value = "sentence")]
    pub context: ContextMode,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValidateCommand {
    /// ATE records: schema, probability rows, optional token alignment.
    Ate(ValidateArgs),
    /// SOE records: schema, duplicates, optional span lookup.
    Soe(ValidateArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct ValidateArgs {
    /// Prediction file.
    #[arg(value_name = "FILE")]
    pub pred: PathBuf,
    /// Also check every record against this corpus.
    #[arg(long, env = "ABSA_CORPUS", value_name = "FILE")]
    pub corpus: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ToyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArg,
    /// Generate this many reviews instead of the bundled corpus.
    #[arg(long)]
    pub reviews: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
