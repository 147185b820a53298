//! LDA over the master question list, per-topic keywords and multi-label
//! question categorization.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qbank::{Question, QuestionBank};
use crate::text::{content_tokens, tokenize, StopWords};

/// A fitted topic index, or the reserved bucket for questions that match no
/// topic's keywords. Serialized as `topic-<n>` / `uncategorized`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TopicId {
    Topic(usize),
    Uncategorized,
}

impl fmt::Display for TopicId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopicId::Topic(n) => write!(f, "topic-{n}"),
            TopicId::Uncategorized => f.write_str("uncategorized"),
        }
    }
}

impl FromStr for TopicId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "uncategorized" {
            return Ok(TopicId::Uncategorized);
        }
        s.strip_prefix("topic-")
            .and_then(|n| n.parse().ok())
            .map(TopicId::Topic)
            .ok_or_else(|| format!("invalid topic id {s:?}"))
    }
}

impl Serialize for TopicId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TopicId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaParams {
    pub num_topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl LdaParams {
    /// `alpha = 50/K`, `beta = 0.01`, 1000 sweeps.
    pub fn with_defaults(num_topics: usize, seed: u64) -> Self {
        Self {
            num_topics,
            alpha: 50.0 / num_topics.max(1) as f64,
            beta: 0.01,
            iterations: 1000,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    #[serde(rename = "K")]
    pub num_topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
    pub vocab: Vec<String>,
    /// `num_topics` rows of topic-word probabilities over `vocab`.
    pub phi: Vec<Vec<f64>>,
}

/// Fits LDA by collapsed Gibbs sampling, treating every question as a
/// bag-of-words document. Stop-words and tokens without a letter are dropped.
/// Deterministic for a given seed and input order.
pub fn fit_lda(questions: &[Question], params: &LdaParams, stopwords: &StopWords) -> Result<TopicModel> {
    let texts: Vec<&str> = questions.iter().map(|q| q.text.as_str()).collect();
    fit_lda_texts(&texts, params, stopwords)
}

pub fn fit_lda_texts(texts: &[&str], params: &LdaParams, stopwords: &StopWords) -> Result<TopicModel> {
    let k = params.num_topics;
    if k == 0 {
        return Err(Error::ConfigInvalid("num_topics must be >= 1".into()));
    }
    if !(params.alpha > 0.0 && params.beta > 0.0) {
        return Err(Error::ConfigInvalid("alpha and beta must be positive".into()));
    }
    if k > texts.len() {
        return Err(Error::TooFewDocuments {
            documents: texts.len(),
            topics: k,
        });
    }

    // Vocabulary in first-seen order; docs without content tokens are dropped.
    let mut vocab: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut docs: Vec<Vec<usize>> = Vec::with_capacity(texts.len());
    for text in texts {
        let ids: Vec<usize> = content_tokens(text, stopwords)
            .into_iter()
            .filter(|tok| tok.chars().any(char::is_alphabetic))
            .map(|tok| {
                *index.entry(tok.clone()).or_insert_with(|| {
                    vocab.push(tok);
                    vocab.len() - 1
                })
            })
            .collect();
        if !ids.is_empty() {
            docs.push(ids);
        }
    }
    if vocab.is_empty() {
        return Err(Error::DegenerateVocabulary);
    }
    if k > docs.len() {
        return Err(Error::TooFewDocuments {
            documents: docs.len(),
            topics: k,
        });
    }

    let v = vocab.len();
    let (alpha, beta) = (params.alpha, params.beta);
    let v_beta = v as f64 * beta;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut doc_topic = vec![vec![0u32; k]; docs.len()];
    let mut topic_word = vec![vec![0u32; v]; k];
    let mut topic_total = vec![0u32; k];
    let mut assignments: Vec<Vec<usize>> = docs
        .iter()
        .enumerate()
        .map(|(d, words)| {
            words
                .iter()
                .map(|&w| {
                    let z = rng.gen_range(0..k);
                    doc_topic[d][z] += 1;
                    topic_word[z][w] += 1;
                    topic_total[z] += 1;
                    z
                })
                .collect()
        })
        .collect();

    let mut weights = vec![0.0f64; k];
    for _ in 0..params.iterations {
        for (d, words) in docs.iter().enumerate() {
            for (i, &w) in words.iter().enumerate() {
                let old = assignments[d][i];
                doc_topic[d][old] -= 1;
                topic_word[old][w] -= 1;
                topic_total[old] -= 1;

                let mut total = 0.0;
                for t in 0..k {
                    let p = (doc_topic[d][t] as f64 + alpha) * (topic_word[t][w] as f64 + beta)
                        / (topic_total[t] as f64 + v_beta);
                    total += p;
                    weights[t] = total;
                }
                let u = rng.gen::<f64>() * total;
                let new = weights.iter().position(|&c| u < c).unwrap_or(k - 1);

                assignments[d][i] = new;
                doc_topic[d][new] += 1;
                topic_word[new][w] += 1;
                topic_total[new] += 1;
            }
        }
    }

    let phi = topic_word
        .iter()
        .zip(&topic_total)
        .map(|(row, &n)| {
            let denom = n as f64 + v_beta;
            row.iter().map(|&c| (c as f64 + beta) / denom).collect()
        })
        .collect();

    Ok(TopicModel {
        num_topics: k,
        alpha,
        beta,
        iterations: params.iterations,
        seed: params.seed,
        vocab,
        phi,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicKeywords {
    /// Indexed by topic number.
    pub topics: Vec<Vec<String>>,
}

impl TopicKeywords {
    pub fn iter(&self) -> impl Iterator<Item = (TopicId, &[String])> {
        self.topics
            .iter()
            .enumerate()
            .map(|(i, kw)| (TopicId::Topic(i), kw.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.topics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }
}

/// The `w` most probable words of each topic; ties broken lexicographically.
pub fn topic_keywords(model: &TopicModel, w: usize) -> Result<TopicKeywords> {
    if w == 0 || w > model.vocab.len() {
        return Err(Error::ConfigInvalid(format!(
            "keywords per topic must be in 1..={}, got {w}",
            model.vocab.len()
        )));
    }
    let topics = model
        .phi
        .iter()
        .map(|row| {
            let mut order: Vec<usize> = (0..model.vocab.len()).collect();
            order.sort_by(|&a, &b| {
                row[b]
                    .partial_cmp(&row[a])
                    .unwrap_or(Ordering::Equal)
                    .then_with(|| model.vocab[a].cmp(&model.vocab[b]))
            });
            order.into_iter().take(w).map(|i| model.vocab[i].clone()).collect()
        })
        .collect();
    Ok(TopicKeywords { topics })
}

fn topics_for_text(text: &str, keywords: &TopicKeywords) -> BTreeSet<TopicId> {
    let tokens: BTreeSet<String> = tokenize(text).into_iter().collect();
    let mut found: BTreeSet<TopicId> = keywords
        .iter()
        .filter(|(_, kws)| kws.iter().any(|kw| tokens.contains(kw)))
        .map(|(id, _)| id)
        .collect();
    if found.is_empty() {
        found.insert(TopicId::Uncategorized);
    }
    found
}

/// Assigns every question (both per-doc and master) the set of topics whose
/// keyword list shares a token with it, or `uncategorized`.
pub fn categorize_questions(bank: &QuestionBank, keywords: &TopicKeywords) -> QuestionBank {
    let mut out = bank.clone();
    for q in out
        .master
        .iter_mut()
        .chain(out.per_doc.values_mut().flat_map(|v| v.iter_mut()))
    {
        q.topics = topics_for_text(&q.text, keywords);
    }
    out
}

/// Percentage of (question, topic) memberships falling on each topic, over
/// the master list.
pub fn question_distribution(bank: &QuestionBank) -> Result<BTreeMap<TopicId, f64>> {
    let mut counts: BTreeMap<TopicId, usize> = BTreeMap::new();
    for q in &bank.master {
        for t in &q.topics {
            *counts.entry(*t).or_default() += 1;
        }
    }
    let total: usize = counts.values().sum();
    if total == 0 {
        return Err(Error::EmptyBank);
    }
    Ok(counts
        .into_iter()
        .map(|(t, c)| (t, 100.0 * c as f64 / total as f64))
        .collect())
}
