// Writing the instruction-tuning JSONL and its fine-tune sidecar.

use finbps::corpus::{BulletSummary, Transcript};
use finbps::generator::{export_finetune_dataset, FineTuneSpec, PromptTemplate};
use finbps::qbank::question_from_bullet;
use finbps::retrieval::{build_context, TfidfEmbedder};

pub fn run_example() -> anyhow::Result<()> {
    let doc = Transcript::from_text("acme", "Revenue was $1.2 billion.\nEPS was $0.45.\nThank you all.")?;
    let summary = BulletSummary::from_text("acme", "Q2 revenue $1.2 billion\nQ2 EPS $0.45").unwrap();
    let questions: Vec<_> = summary.bullets.iter().enumerate().map(|(i, b)| question_from_bullet(b, "acme", i)).collect();
    let ctx = build_context(&doc, &questions, 1, &TfidfEmbedder)?;

    let dir = std::env::temp_dir().join(format!("finbps-export-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let jsonl = dir.join("train.jsonl");
    let sidecar = export_finetune_dataset(&[(ctx, summary)], &PromptTemplate::default(), &FineTuneSpec::default(), &jsonl)?;
    print!("{}", std::fs::read_to_string(&jsonl)?);
    println!("{}", std::fs::read_to_string(&sidecar)?);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
