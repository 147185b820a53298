// Fitting LDA over questions, extracting topic keywords and categorizing
// the bank by keyword match.

use std::collections::BTreeMap;

use finbps::qbank::{question_from_bullet, QuestionBank};
use finbps::text::StopWords;
use finbps::topics::{categorize_questions, fit_lda, question_distribution, topic_keywords, LdaParams};

pub fn run_example() -> anyhow::Result<()> {
    let bullets = [
        "revenue growth $5 billion",
        "quarterly revenue growth 12%",
        "net profit $300 million",
        "net profit margin 9%",
        "free cash flow $1.1 billion",
        "operating cash flow $2 billion",
    ];
    let questions: Vec<_> = bullets.iter().enumerate().map(|(i, b)| question_from_bullet(b, "demo", i)).collect();

    let params = LdaParams { iterations: 300, alpha: 0.1, ..LdaParams::with_defaults(3, 42) };
    let model = fit_lda(&questions, &params, &StopWords::default())?;
    let keywords = topic_keywords(&model, 2)?;
    for (topic, words) in keywords.iter() {
        println!("{topic}: {words:?}");
    }

    let bank = QuestionBank {
        per_doc: BTreeMap::from([("demo".to_string(), questions.clone())]),
        master: questions,
    };
    let bank = categorize_questions(&bank, &keywords);
    for (topic, pct) in question_distribution(&bank)? {
        println!("{topic}: {pct:.1}%");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
