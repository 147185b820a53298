use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use finbps::pipeline::{run_stage, PipelineConfig, Stage, StageInputs, Workspace};

#[derive(Parser)]
#[command(name = "finbps", version, about = "Staged earnings-call bullet-point summarization pipeline")]
struct Cli {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "workspace")]
    workspace: PathBuf,
    /// Seed for both the corpus split and LDA.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(flatten)]
    knobs: Knobs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Knobs {
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true)]
    num_topics: Option<usize>,
    #[arg(long, global = true)]
    keywords_per_topic: Option<usize>,
    #[arg(long, global = true)]
    lda_iters: Option<usize>,
    #[arg(long, global = true)]
    q_per_topic: Option<usize>,
    /// Use the full master list when no topic is detected.
    #[arg(long, global = true)]
    fallback_on_empty_detection: bool,
    #[arg(long, global = true)]
    stopwords_file: Option<PathBuf>,
    #[arg(long, global = true)]
    instruction_file: Option<PathBuf>,
    #[arg(long, global = true)]
    separator: Option<String>,
    #[arg(long, global = true)]
    max_input_tokens: Option<usize>,
    #[arg(long, global = true)]
    max_new_tokens: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Load transcripts and summaries, split 7:1:2, compute corpus statistics.
    Ingest(CorpusDirs),
    /// Build the question bank from training summaries.
    Qgen,
    /// Fit LDA over the master list and categorize questions.
    Topics,
    /// Build training contexts and export the instruction-tuning dataset.
    Extract,
    /// Route test transcripts to bank questions and build their contexts.
    Route,
    /// Prompt the generation service (or the offline mock) for test summaries.
    Generate,
    /// Score predictions against test references.
    Eval {
        /// Predictions JSON (`{id: [bullets]}`) to score instead of the generate stage output.
        #[arg(long)]
        predictions: Option<PathBuf>,
    },
    /// Run every stage in order.
    Run(CorpusDirs),
}

#[derive(Args)]
struct CorpusDirs {
    #[arg(long)]
    transcripts: PathBuf,
    #[arg(long)]
    summaries: PathBuf,
}

fn build_config(cli: &Cli) -> finbps::Result<PipelineConfig> {
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::from_file(path)?,
        None => PipelineConfig::default(),
    };
    config.apply_env();
    if let Some(seed) = cli.seed {
        config.set_seed(seed);
    }
    let k = &cli.knobs;
    macro_rules! set {
        ($($field:ident),*) => {$(
            if let Some(v) = k.$field.clone() {
                config.$field = v;
            }
        )*};
    }
    set!(k, num_topics, keywords_per_topic, lda_iters, q_per_topic, separator, max_input_tokens, max_new_tokens);
    if k.stopwords_file.is_some() {
        config.stopwords_file = k.stopwords_file.clone();
    }
    if k.instruction_file.is_some() {
        config.instruction_file = k.instruction_file.clone();
    }
    if k.fallback_on_empty_detection {
        config.fallback_on_empty_detection = true;
    }
    Ok(config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();

    let mut inputs = StageInputs::default();
    let stage = match &cli.command {
        Command::Ingest(dirs) | Command::Run(dirs) => {
            inputs.transcripts_dir = Some(dirs.transcripts.clone());
            inputs.summaries_dir = Some(dirs.summaries.clone());
            if matches!(cli.command, Command::Run(_)) {
                Stage::Run
            } else {
                Stage::Ingest
            }
        }
        Command::Qgen => Stage::Qgen,
        Command::Topics => Stage::Topics,
        Command::Extract => Stage::Extract,
        Command::Route => Stage::Route,
        Command::Generate => Stage::Generate,
        Command::Eval { predictions } => {
            inputs.predictions = predictions.clone();
            Stage::Eval
        }
    };

    let result = build_config(&cli)
        .and_then(|config| run_stage(stage, &config, &Workspace::new(&cli.workspace), &inputs));
    match result {
        Ok(outcomes) => {
            println!("{}", serde_json::to_string_pretty(&outcomes).expect("outcomes serialize"));
            ExitCode::SUCCESS
        }
        Err(err) => {
            let stage_name = match &err {
                finbps::Error::Stage { stage, .. } => *stage,
                _ => stage.name(),
            };
            let body = serde_json::json!({
                "error": err.kind(),
                "stage": stage_name,
                "message": err.to_string(),
            });
            eprintln!("{body}");
            ExitCode::from(2)
        }
    }
}
