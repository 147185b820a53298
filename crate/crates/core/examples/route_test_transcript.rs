// Routing an unseen transcript: detect topics by keyword, pick the
// closest bank questions per topic, then build its context.

use std::collections::BTreeMap;

use finbps::corpus::Transcript;
use finbps::qbank::{question_from_bullet, QuestionBank};
use finbps::retrieval::{build_context, TfidfEmbedder};
use finbps::router::{detect_topics, select_questions};
use finbps::topics::{categorize_questions, TopicKeywords};

pub fn run_example() -> anyhow::Result<()> {
    let questions: Vec<_> = ["Q2 revenue $1 billion", "Revenue growth 5%", "Net debt $2 billion", "Dividend per share $0.20"]
        .iter()
        .enumerate()
        .map(|(i, b)| question_from_bullet(b, "train", i))
        .collect();
    let keywords = TopicKeywords {
        topics: vec![vec!["revenue".into(), "growth".into()], vec!["debt".into(), "dividend".into()]],
    };
    let bank = categorize_questions(
        &QuestionBank { per_doc: BTreeMap::from([("train".into(), questions.clone())]), master: questions },
        &keywords,
    );

    let doc = Transcript::from_text(
        "test",
        "Revenue grew 11% to $3.4 billion.\nWe reduced net debt by $400 million.\nThanks for joining.",
    )?;
    let detection = detect_topics(&doc, &keywords);
    for d in &detection.detected {
        println!("{} via {:?}", d.topic, d.evidence.iter().map(|e| &e.keyword).collect::<Vec<_>>());
    }
    let chosen = select_questions(&doc, &detection, &bank, 1, &TfidfEmbedder)?;
    for q in &chosen {
        println!("question: {}", q.text);
    }
    println!("context: {}", build_context(&doc, &chosen, 1, &TfidfEmbedder)?.text());
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
