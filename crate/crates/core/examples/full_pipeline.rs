// Every stage over the bundled synthetic corpus in a scratch workspace,
// using the built-in embedder and mock generator.

use std::path::Path;

use finbps::pipeline::{run_stage, PipelineConfig, Stage, StageInputs, Workspace};

pub fn run_example() -> anyhow::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic");
    let config = PipelineConfig::from_file(&data.join("config.json"))?;
    let inputs = StageInputs {
        transcripts_dir: Some(data.join("transcripts")),
        summaries_dir: Some(data.join("summaries")),
        predictions: None,
    };
    let root = std::env::temp_dir().join(format!("finbps-pipeline-{}", std::process::id()));
    let ws = Workspace::new(&root);

    for outcome in run_stage(Stage::Run, &config, &ws, &inputs)? {
        println!("{:<8} {} files", outcome.stage, outcome.outputs.len());
    }
    print!("{}", std::fs::read_to_string(ws.artifact(Stage::Eval, "metrics.txt"))?);
    std::fs::remove_dir_all(&root)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
