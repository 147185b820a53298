// Sentence segmentation, corpus loading, the seeded 7:1:2 split and
// corpus statistics over the bundled synthetic corpus.

use std::path::Path;

use finbps::corpus::{corpus_stats, load_corpus, segment_sentences, split_corpus};

pub fn run_example() -> anyhow::Result<()> {
    let raw = "Revenue rose to $6.15 billion. EPS was $0.97. Acme Inc. raised guidance.";
    for s in segment_sentences(raw)? {
        println!("[{}] {}", s.position, s.text);
    }

    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic");
    let corpus = load_corpus(&data.join("transcripts"), &data.join("summaries"))?;
    let split = split_corpus(&corpus, 42)?;
    println!("train {:?} val {:?} test {:?}", split.train, split.val, split.test);

    let stats = corpus_stats(&corpus)?;
    println!(
        "{} docs, mean {:.1} words, compression {:.2}",
        stats.documents, stats.mean_doc_words, stats.compression_ratio
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
