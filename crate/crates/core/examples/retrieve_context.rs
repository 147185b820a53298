// Query-focused TF-IDF retrieval: top-k sentences per question and the
// merged extractive context.

use finbps::corpus::Transcript;
use finbps::qbank::question_from_bullet;
use finbps::retrieval::{build_context, top_k_sentences, TfidfEmbedder};

pub fn run_example() -> anyhow::Result<()> {
    let doc = Transcript::from_text(
        "acme",
        "Good morning and welcome to the call.\n\
         Revenue for the quarter was $1.2 billion, up 8%.\n\
         Adjusted EPS came in at $0.45.\n\
         Our free cash flow was $210 million.\n\
         We remain focused on execution.",
    )?;
    let questions = [
        question_from_bullet("Q2 revenue $1.2 billion", "acme", 0),
        question_from_bullet("Adjusted EPS $0.45", "acme", 1),
    ];

    for hit in top_k_sentences(&doc, &questions[0], 2, &TfidfEmbedder)? {
        println!("#{} {:.3} {}", hit.rank, hit.score, hit.sentence.text);
    }
    let ctx = build_context(&doc, &questions, 1, &TfidfEmbedder)?;
    println!("context: {}", ctx.text());
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
