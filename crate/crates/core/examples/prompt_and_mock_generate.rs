// Prompt assembly with input truncation, and the offline mock generator
// standing in for the generation service.

use finbps::corpus::Transcript;
use finbps::generator::{build_prompt, generate, GenerationRequest, MockGenerator, PromptTemplate};
use finbps::qbank::question_from_bullet;
use finbps::retrieval::{build_context, TfidfEmbedder};

pub fn run_example() -> anyhow::Result<()> {
    let doc = Transcript::from_text(
        "acme",
        "Revenue for the quarter was $1.2 billion, up 8% from a year ago on strong demand across every region we serve.\n\
         Adjusted EPS came in at $0.45.\n\
         We expect full year revenue between $4.8 billion and $5.0 billion.",
    )?;
    let questions = [question_from_bullet("revenue $1.2 billion", "acme", 0), question_from_bullet("eps $0.45", "acme", 1)];
    let ctx = build_context(&doc, &questions, 2, &TfidfEmbedder)?;

    let template = PromptTemplate::default();
    let prompt = build_prompt(&template, &ctx, 40)?;
    println!("prompt ({} tokens cut):\n{}\n", prompt.truncated_tokens, prompt.text);

    let mock = MockGenerator::new(template.separator.clone());
    for bullet in generate(&mock, &GenerationRequest::new(prompt.text))? {
        println!("- {bullet}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
