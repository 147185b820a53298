// Template question generation from reference bullets and the
// deduplicated question bank.

use finbps::corpus::BulletSummary;
use finbps::qbank::{build_question_bank, question_text_from_bullet, QuestionSource};

pub fn run_example() -> anyhow::Result<()> {
    for bullet in ["Q2 non-GAAP earnings per share $0.97.", "q2 net profit 64 million usd.", "Sees FY EPS $4.10 to $4.30"] {
        println!("{bullet:<40} -> {}", question_text_from_bullet(bullet));
    }

    let summaries = vec![
        BulletSummary::from_text("acme", "Q2 revenue $1.2 billion\nQ2 EPS $0.45").unwrap(),
        BulletSummary::from_text("zenith", "q2 revenue $880 million\nGross margin 41%").unwrap(),
    ];
    let bank = build_question_bank(&summaries, QuestionSource::Template)?;
    println!("{} per-doc questions, {} in the master list", bank.total_per_doc(), bank.master.len());
    for q in &bank.master {
        println!("  {} ({} #{})", q.text, q.source_doc, q.source_bullet_index);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
