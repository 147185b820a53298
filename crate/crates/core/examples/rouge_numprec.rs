// ROUGE-1/2/L and numeric precision on one prediction, then a corpus
// report rendered as a table.

use std::collections::BTreeMap;

use finbps::corpus::{BulletSummary, Transcript};
use finbps::metrics::{evaluate_corpus, extract_numbers, num_prec, rouge_l, rouge_n};

pub fn run_example() -> anyhow::Result<()> {
    let candidate = "q2 earnings per share 0.97";
    let reference = "q2 non gaap earnings per share 0.97";
    println!("rouge-1 {:?}", rouge_n(candidate, reference, 1));
    println!("rouge-2 {:?}", rouge_n(candidate, reference, 2));
    println!("rouge-l {:?}", rouge_l(candidate, reference));

    let source = Transcript::from_text("acme", "EPS was $0.97 for the quarter.")?;
    let pred = "eps $0.97, revenue $6.15 billion";
    let nums: Vec<_> = extract_numbers(pred).into_iter().map(|n| n.normalized).collect();
    println!("numbers {nums:?}, num-prec {}", num_prec(pred, &source));

    let preds = BTreeMap::from([("acme".to_string(), vec![pred.to_string()])]);
    let refs = BTreeMap::from([("acme".to_string(), BulletSummary::from_text("acme", "Q2 EPS $0.97").unwrap())]);
    let sources = BTreeMap::from([("acme".to_string(), source)]);
    let report = evaluate_corpus(&preds, &refs, &sources)?;
    println!("{}", report.to_table("demo"));
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
