//! Sentence/question embedding, cosine scoring, top-k selection and
//! extractive context assembly.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{Sentence, Transcript};
use crate::error::{Error, Result};
use crate::qbank::Question;
use crate::text::tokenize;

/// Maps texts to dense vectors. `fit_corpus` is the document the texts are
/// being compared within; encoders that need no fitting ignore it.
pub trait Embedder: Send + Sync {
    fn embed(&self, texts: &[&str], fit_corpus: &[&str]) -> Result<Vec<Vec<f64>>>;
}

/// TF-IDF fit on the document's own sentences.
/// `idf = ln((1 + N) / (1 + df)) + 1`, raw term counts, L2-normalized.
#[derive(Debug, Clone, Copy, Default)]
pub struct TfidfEmbedder;

impl Embedder for TfidfEmbedder {
    fn embed(&self, texts: &[&str], fit_corpus: &[&str]) -> Result<Vec<Vec<f64>>> {
        Ok(tfidf_embed(texts, fit_corpus))
    }
}

pub fn tfidf_embed(texts: &[&str], fit_corpus: &[&str]) -> Vec<Vec<f64>> {
    let mut vocab: BTreeMap<String, usize> = BTreeMap::new();
    let mut df: HashMap<String, usize> = HashMap::new();
    for sentence in fit_corpus {
        let mut terms = tokenize(sentence);
        terms.sort();
        terms.dedup();
        for t in terms {
            *df.entry(t.clone()).or_default() += 1;
            vocab.entry(t).or_default();
        }
    }
    for (i, slot) in vocab.values_mut().enumerate() {
        *slot = i;
    }
    let n = fit_corpus.len() as f64;
    let idf: Vec<f64> = vocab
        .keys()
        .map(|t| ((1.0 + n) / (1.0 + df[t] as f64)).ln() + 1.0)
        .collect();

    texts
        .iter()
        .map(|text| {
            let mut v = vec![0.0; vocab.len()];
            for tok in tokenize(text) {
                if let Some(&i) = vocab.get(&tok) {
                    v[i] += 1.0;
                }
            }
            for (x, w) in v.iter_mut().zip(&idf) {
                *x *= w;
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                v.iter_mut().for_each(|x| *x /= norm);
            }
            v
        })
        .collect()
}

/// Cosine similarity clamped to [-1, 1]; zero against any zero vector.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSentence {
    pub sentence: Sentence,
    pub question: String,
    pub score: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractiveContext {
    pub doc_id: String,
    pub selections: Vec<ScoredSentence>,
    /// Deduplicated by position, in document order.
    pub context_sentences: Vec<Sentence>,
}

impl ExtractiveContext {
    pub fn text(&self) -> String {
        self.context_sentences
            .iter()
            .map(|s| s.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn is_empty(&self) -> bool {
        self.context_sentences.is_empty()
    }
}

fn check_dims(vectors: &[Vec<f64>], expected: usize) -> Result<()> {
    if vectors.len() != expected {
        return Err(Error::MalformedResponse(format!(
            "embedder returned {} vectors for {expected} texts",
            vectors.len()
        )));
    }
    if let Some(first) = vectors.first() {
        if vectors.iter().any(|v| v.len() != first.len()) {
            return Err(Error::MalformedResponse("embedding dimensions differ within one batch".into()));
        }
    }
    Ok(())
}

/// Ranks `sentences` against one query vector; ties go to the earlier position.
fn rank_sentences(
    sentences: &[Sentence],
    sentence_vecs: &[Vec<f64>],
    query_vec: &[f64],
    question: &str,
    k: usize,
) -> Vec<ScoredSentence> {
    let mut scored: Vec<(usize, f64)> = sentence_vecs
        .iter()
        .enumerate()
        .map(|(i, v)| (i, cosine(query_vec, v)))
        .collect();
    // Stable: equal scores keep document order.
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    scored
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(r, (i, score))| ScoredSentence {
            sentence: sentences[i].clone(),
            question: question.to_string(),
            score,
            rank: r + 1,
        })
        .collect()
}

/// Embeds the document's sentences followed by `queries` in one batch.
fn embed_with_doc(
    doc: &Transcript,
    queries: &[&str],
    embedder: &dyn Embedder,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let sentences = doc.sentence_texts();
    let mut batch = sentences.clone();
    batch.extend_from_slice(queries);
    let mut vectors = embedder.embed(&batch, &sentences)?;
    check_dims(&vectors, batch.len())?;
    let query_vecs = vectors.split_off(sentences.len());
    Ok((vectors, query_vecs))
}

pub fn top_k_sentences(
    doc: &Transcript,
    question: &Question,
    k: usize,
    embedder: &dyn Embedder,
) -> Result<Vec<ScoredSentence>> {
    if k == 0 {
        return Err(Error::ConfigInvalid("k must be >= 1".into()));
    }
    if doc.sentences.is_empty() {
        return Err(Error::EmptyDocument);
    }
    let (sentence_vecs, query_vecs) = embed_with_doc(doc, &[question.text.as_str()], embedder)?;
    Ok(rank_sentences(&doc.sentences, &sentence_vecs, &query_vecs[0], &question.text, k))
}

/// Union of per-question top-k selections.
pub fn build_context(
    doc: &Transcript,
    questions: &[Question],
    k: usize,
    embedder: &dyn Embedder,
) -> Result<ExtractiveContext> {
    if questions.is_empty() {
        return Err(Error::NoQuestions(doc.id.clone()));
    }
    if k == 0 {
        return Err(Error::ConfigInvalid("k must be >= 1".into()));
    }
    if doc.sentences.is_empty() {
        return Err(Error::EmptyDocument);
    }
    let queries: Vec<&str> = questions.iter().map(|q| q.text.as_str()).collect();
    let (sentence_vecs, query_vecs) = embed_with_doc(doc, &queries, embedder)?;

    let mut selections = Vec::with_capacity(k * questions.len());
    let mut chosen: BTreeMap<usize, Sentence> = BTreeMap::new();
    for (q, qv) in questions.iter().zip(&query_vecs) {
        for s in rank_sentences(&doc.sentences, &sentence_vecs, qv, &q.text, k) {
            chosen.entry(s.sentence.position).or_insert_with(|| s.sentence.clone());
            selections.push(s);
        }
    }
    Ok(ExtractiveContext {
        doc_id: doc.id.clone(),
        selections,
        context_sentences: chosen.into_values().collect(),
    })
}
