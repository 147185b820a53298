//! Question generation from reference bullets and the deduplicated question bank.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::BulletSummary;
use crate::error::{Error, Result};
use crate::text::normalize;
use crate::topics::TopicId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub text: String,
    pub source_doc: String,
    pub source_bullet_index: usize,
    #[serde(default)]
    pub topics: BTreeSet<TopicId>,
}

impl Question {
    pub fn normalized(&self) -> String {
        normalize(&self.text)
    }
}

/// Something that turns one bullet into one question, e.g. a neural QG service.
pub trait QgClient: Send + Sync {
    fn question(&self, sentence: &str) -> Result<String>;
}

/// Where questions come from when building a bank.
#[derive(Clone, Copy)]
pub enum QuestionSource<'a> {
    Template,
    External {
        client: &'a dyn QgClient,
        fallback: bool,
    },
}

const SCALE_WORDS: &[&str] = &["million", "billion"];
const UNIT_WORDS: &[&str] = &["usd", "percent"];
const RANGE_WORDS: &[&str] = &["-", "to", "–"];

/// Deterministic template question for a bullet: the bullet with its trailing
/// value expression removed, phrased as `what is <phrase>?`.
pub fn question_text_from_bullet(bullet: &str) -> String {
    let lowered = bullet.to_lowercase();
    let trimmed = trim_trailing_punct(&lowered);
    let tokens: Vec<&str> = trimmed.split_whitespace().collect();
    let keep = tokens.len() - value_suffix_len(&tokens);
    let phrase = trim_trailing_punct(&tokens[..keep].join(" ")).to_string();
    let phrase = if phrase.is_empty() {
        tokens.join(" ")
    } else {
        phrase
    };
    format!("what is {phrase}?")
}

pub fn question_from_bullet(bullet: &str, source_doc: &str, index: usize) -> Question {
    Question {
        text: question_text_from_bullet(bullet),
        source_doc: source_doc.to_string(),
        source_bullet_index: index,
        topics: BTreeSet::new(),
    }
}

fn trim_trailing_punct(s: &str) -> &str {
    s.trim_end_matches(|c: char| c.is_whitespace() || matches!(c, '.' | ',' | ';' | ':' | '!' | '?'))
}

fn is_number_token(tok: &str) -> bool {
    let t = tok.trim_start_matches(['$', '€', '£']);
    let t = t.trim_end_matches('%');
    if t.is_empty() {
        return false;
    }
    // Ranges written without spaces, e.g. `16%-19%`.
    if let Some((a, b)) = t.split_once('-') {
        if !a.is_empty() && !b.is_empty() {
            return is_number_token(a) && is_number_token(b);
        }
    }
    let t = t.trim_start_matches(['+', '-']);
    let mut seen_digit = false;
    let mut seen_dot = false;
    for c in t.chars() {
        match c {
            '0'..='9' => seen_digit = true,
            ',' if seen_digit && !seen_dot => {}
            '.' if seen_digit && !seen_dot => seen_dot = true,
            _ => return false,
        }
    }
    seen_digit && !t.ends_with(['.', ','])
}

/// Length (in tokens) of the longest trailing value expression:
/// `number [scale] ((-|to) number [scale])* [unit]`, where a number may carry
/// a currency sign or `%`.
fn value_suffix_len(tokens: &[&str]) -> usize {
    let mut end = tokens.len();
    if end >= 2 && tokens[end - 2] == "per" && tokens[end - 1] == "share" {
        end -= 2;
    } else if end >= 1 && UNIT_WORDS.contains(&tokens[end - 1]) {
        end -= 1;
    }
    let Some(mut start) = number_group_start(tokens, end) else {
        return 0;
    };
    while start >= 1 && RANGE_WORDS.contains(&tokens[start - 1]) {
        match number_group_start(tokens, start - 1) {
            Some(s) => start = s,
            None => break,
        }
    }
    tokens.len() - start
}

/// Start index of `number [scale]` ending right before `end`.
fn number_group_start(tokens: &[&str], end: usize) -> Option<usize> {
    let mut i = end;
    if i >= 1 && SCALE_WORDS.contains(&tokens[i - 1]) {
        i -= 1;
    }
    (i >= 1 && is_number_token(tokens[i - 1])).then(|| i - 1)
}

fn clean_external_question(raw: &str) -> Result<String> {
    let single_line = raw.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    let body = single_line.trim_end_matches(['?', '.', ' ']);
    if body.is_empty() {
        return Err(Error::MalformedResponse(format!(
            "empty question for response {raw:?}"
        )));
    }
    Ok(format!("{body}?"))
}

/// One question per bullet from an external generator. With `fallback`,
/// a failing request is answered by the template rule instead.
pub fn generate_questions_external(
    bullets: &[String],
    client: &dyn QgClient,
    fallback: bool,
) -> Result<Vec<String>> {
    bullets
        .iter()
        .map(|b| match client.question(b).and_then(|q| clean_external_question(&q)) {
            Ok(q) => Ok(q),
            Err(e @ (Error::ServiceUnavailable(_) | Error::MalformedResponse(_))) if fallback => {
                log::warn!("question service failed ({e}); using template for {b:?}");
                Ok(question_text_from_bullet(b))
            }
            Err(e) => Err(e),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionBank {
    pub per_doc: BTreeMap<String, Vec<Question>>,
    pub master: Vec<Question>,
}

impl QuestionBank {
    pub fn n_of(&self, doc: &str) -> usize {
        self.per_doc.get(doc).map_or(0, Vec::len)
    }

    pub fn total_per_doc(&self) -> usize {
        self.per_doc.values().map(Vec::len).sum()
    }

    /// Master questions carrying `topic`, in master order.
    pub fn questions_in<'a>(&'a self, topic: &'a TopicId) -> impl Iterator<Item = &'a Question> + 'a {
        self.master.iter().filter(move |q| q.topics.contains(topic))
    }
}

/// Builds per-document and master question lists from training summaries.
/// Both levels are deduplicated on normalized text; order follows doc id,
/// then bullet index.
pub fn build_question_bank(
    train_summaries: &[BulletSummary],
    source: QuestionSource<'_>,
) -> Result<QuestionBank> {
    if train_summaries.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut sorted: Vec<&BulletSummary> = train_summaries.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));

    let mut per_doc = BTreeMap::new();
    let mut master = Vec::new();
    let mut master_seen = HashSet::new();
    for summary in sorted {
        let texts = match source {
            QuestionSource::Template => summary
                .bullets
                .iter()
                .map(|b| question_text_from_bullet(b))
                .collect(),
            QuestionSource::External { client, fallback } => {
                generate_questions_external(&summary.bullets, client, fallback)?
            }
        };
        let mut doc_seen = HashSet::new();
        let doc_questions: &mut Vec<Question> = per_doc.entry(summary.id.clone()).or_default();
        for (index, text) in texts.into_iter().enumerate() {
            let q = Question {
                text,
                source_doc: summary.id.clone(),
                source_bullet_index: index,
                topics: BTreeSet::new(),
            };
            let key = q.normalized();
            if !doc_seen.insert(key.clone()) {
                continue;
            }
            if master_seen.insert(key) {
                master.push(q.clone());
            }
            doc_questions.push(q);
        }
    }
    Ok(QuestionBank { per_doc, master })
}
