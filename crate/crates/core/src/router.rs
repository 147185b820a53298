//! Test-time question routing: find topics a transcript touches and pick the
//! bank questions that best match the triggering sentences.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::Transcript;
use crate::error::{Error, Result};
use crate::qbank::{Question, QuestionBank};
use crate::retrieval::{cosine, Embedder};
use crate::text::tokenize;
use crate::topics::{TopicId, TopicKeywords};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub keyword: String,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectedTopic {
    pub topic: TopicId,
    pub evidence: Vec<Evidence>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicDetection {
    pub doc_id: String,
    pub detected: Vec<DetectedTopic>,
}

impl TopicDetection {
    pub fn is_empty(&self) -> bool {
        self.detected.is_empty()
    }
}

/// A topic is detected when any of its keywords occurs as a token in any
/// sentence. One evidence entry per (keyword, sentence) hit.
pub fn detect_topics(doc: &Transcript, keywords: &TopicKeywords) -> TopicDetection {
    let sentence_tokens: Vec<HashSet<String>> = doc
        .sentences
        .iter()
        .map(|s| tokenize(&s.text).into_iter().collect())
        .collect();
    let detected = keywords
        .iter()
        .filter_map(|(topic, kws)| {
            let evidence: Vec<Evidence> = doc
                .sentences
                .iter()
                .zip(&sentence_tokens)
                .flat_map(|(s, toks)| {
                    kws.iter().filter(|kw| toks.contains(*kw)).map(|kw| Evidence {
                        keyword: kw.clone(),
                        position: s.position,
                    })
                })
                .collect();
            (!evidence.is_empty()).then_some(DetectedTopic { topic, evidence })
        })
        .collect();
    TopicDetection {
        doc_id: doc.id.clone(),
        detected,
    }
}

/// For each detected topic, the `q_per_topic` bank questions closest to the
/// centroid of that topic's evidence sentences. Results are unioned and
/// deduplicated on normalized text, ordered by topic then rank.
pub fn select_questions(
    doc: &Transcript,
    detection: &TopicDetection,
    bank: &QuestionBank,
    q_per_topic: usize,
    embedder: &dyn Embedder,
) -> Result<Vec<Question>> {
    if detection.is_empty() {
        return Err(Error::NoTopicsDetected(doc.id.clone()));
    }
    if q_per_topic == 0 {
        return Err(Error::ConfigInvalid("q_per_topic must be >= 1".into()));
    }
    let fit_corpus = doc.sentence_texts();
    let mut selected = Vec::new();
    let mut seen = HashSet::new();

    for det in &detection.detected {
        let bucket: Vec<&Question> = bank.questions_in(&det.topic).collect();
        if bucket.is_empty() {
            continue;
        }
        let positions: BTreeSet<usize> = det.evidence.iter().map(|e| e.position).collect();
        let mut batch: Vec<&str> = positions
            .iter()
            .filter_map(|&p| doc.sentences.get(p).map(|s| s.text.as_str()))
            .collect();
        let n_evidence = batch.len();
        if n_evidence == 0 {
            continue;
        }
        batch.extend(bucket.iter().map(|q| q.text.as_str()));

        let vectors = embedder.embed(&batch, &fit_corpus)?;
        if vectors.len() != batch.len() {
            return Err(Error::MalformedResponse(format!(
                "embedder returned {} vectors for {} texts",
                vectors.len(),
                batch.len()
            )));
        }
        let dim = vectors[0].len();
        let mut centroid = vec![0.0; dim];
        for v in &vectors[..n_evidence] {
            if v.len() != dim {
                return Err(Error::MalformedResponse("embedding dimensions differ within one batch".into()));
            }
            centroid.iter_mut().zip(v).for_each(|(c, x)| *c += x);
        }
        centroid.iter_mut().for_each(|c| *c /= n_evidence as f64);

        let mut scored: Vec<(usize, f64)> = vectors[n_evidence..]
            .iter()
            .enumerate()
            .map(|(i, v)| (i, cosine(v, &centroid)))
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1));
        for (i, _) in scored.into_iter().take(q_per_topic) {
            let q = bucket[i];
            if seen.insert(q.normalized()) {
                selected.push(q.clone());
            }
        }
    }
    Ok(selected)
}
