//! Transcript/summary ingestion, sentence segmentation, dataset splits and
//! corpus statistics.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::whitespace_tokens;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub position: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub id: String,
    pub sentences: Vec<Sentence>,
    pub word_count: usize,
}

impl Transcript {
    pub fn from_text(id: impl Into<String>, raw_text: &str) -> Result<Self> {
        let sentences = segment_sentences(raw_text)?;
        let word_count = sentences.iter().map(|s| whitespace_tokens(&s.text)).sum();
        Ok(Self {
            id: id.into(),
            sentences,
            word_count,
        })
    }

    pub fn sentence_texts(&self) -> Vec<&str> {
        self.sentences.iter().map(|s| s.text.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BulletSummary {
    pub id: String,
    pub bullets: Vec<String>,
}

impl BulletSummary {
    /// One bullet per non-blank line. Returns `None` when no bullet survives.
    pub fn from_text(id: impl Into<String>, raw_text: &str) -> Option<Self> {
        let bullets: Vec<String> = raw_text
            .lines()
            .map(|l| l.trim().to_string())
            .filter(|l| !l.is_empty())
            .collect();
        (!bullets.is_empty()).then(|| Self {
            id: id.into(),
            bullets,
        })
    }

    pub fn word_count(&self) -> usize {
        self.bullets.iter().map(|b| whitespace_tokens(b)).sum()
    }

    pub fn joined(&self) -> String {
        self.bullets.join("\n")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub transcript: Transcript,
    pub summary: BulletSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    /// Sorted by id.
    pub documents: Vec<Document>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl Corpus {
    pub fn new(mut documents: Vec<Document>) -> Result<Self> {
        if documents.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        documents.sort_by(|a, b| a.transcript.id.cmp(&b.transcript.id));
        Ok(Self {
            documents,
            warnings: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.documents.iter().map(|d| d.transcript.id.clone()).collect()
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.documents
            .binary_search_by(|d| d.transcript.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.documents[i])
    }

    /// Documents whose ids are listed, in the order given. Unknown ids are skipped.
    pub fn select<'a>(&'a self, ids: &'a [String]) -> impl Iterator<Item = &'a Document> + 'a {
        ids.iter().filter_map(|id| self.get(id))
    }

    /// Concatenates two corpora; later duplicates of an id are dropped with a warning.
    pub fn merge(mut self, other: Corpus) -> Corpus {
        let mut warnings = std::mem::take(&mut self.warnings);
        warnings.extend(other.warnings);
        let mut by_id: BTreeMap<String, Document> = BTreeMap::new();
        for doc in self.documents.into_iter().chain(other.documents) {
            let id = doc.transcript.id.clone();
            if by_id.contains_key(&id) {
                warnings.push(format!("duplicate id {id} dropped during merge"));
            } else {
                by_id.insert(id, doc);
            }
        }
        Corpus {
            documents: by_id.into_values().collect(),
            warnings,
        }
    }
}

const ABBREVIATIONS: &[&str] = &["inc.", "corp.", "q1.", "q2.", "q3.", "q4.", "u.s.", "vs.", "no."];

/// Splits raw transcript text into sentences.
///
/// Text containing line breaks is treated as pre-segmented: every non-blank
/// line is one sentence. Otherwise the text is split after `.`, `?` or `!`
/// when followed by whitespace and then an uppercase letter or a digit,
/// except after the abbreviations in [`ABBREVIATIONS`].
pub fn segment_sentences(raw_text: &str) -> Result<Vec<Sentence>> {
    if raw_text.trim().is_empty() {
        return Err(Error::EmptyDocument);
    }
    let pieces: Vec<String> = if raw_text.contains('\n') {
        raw_text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect()
    } else {
        split_running_text(raw_text)
    };
    Ok(pieces
        .into_iter()
        .enumerate()
        .map(|(position, text)| Sentence { position, text })
        .collect())
}

fn split_running_text(text: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0usize;
    for (i, &(byte, c)) in chars.iter().enumerate() {
        if !matches!(c, '.' | '?' | '!') {
            continue;
        }
        // Require whitespace, then an uppercase letter or digit.
        let mut j = i + 1;
        if j >= chars.len() || !chars[j].1.is_whitespace() {
            continue;
        }
        while j < chars.len() && chars[j].1.is_whitespace() {
            j += 1;
        }
        let Some(&(_, next)) = chars.get(j) else {
            continue;
        };
        if !(next.is_uppercase() || next.is_ascii_digit()) {
            continue;
        }
        let end = byte + c.len_utf8();
        if c == '.' && ends_with_abbreviation(&text[start..end]) {
            continue;
        }
        push_trimmed(&mut out, &text[start..end]);
        start = chars[j].0;
    }
    push_trimmed(&mut out, &text[start..]);
    out
}

fn ends_with_abbreviation(piece: &str) -> bool {
    let last = piece
        .split_whitespace()
        .last()
        .unwrap_or_default()
        .to_lowercase();
    ABBREVIATIONS.contains(&last.as_str())
}

fn push_trimmed(out: &mut Vec<String>, piece: &str) {
    let t = piece.trim();
    if !t.is_empty() {
        out.push(t.to_string());
    }
}

/// Loads transcript/summary pairs joined by file stem. Only `.txt` files are
/// considered; unpaired or unreadable-as-document files become warnings.
pub fn load_corpus(transcripts_dir: &Path, summaries_dir: &Path) -> Result<Corpus> {
    let transcripts = list_txt(transcripts_dir)?;
    let summaries = list_txt(summaries_dir)?;
    let mut warnings = Vec::new();
    let mut documents = Vec::new();

    for (stem, t_path) in &transcripts {
        let Some(s_path) = summaries.get(stem) else {
            warnings.push(format!("transcript {stem} has no matching summary"));
            continue;
        };
        let t_raw = fs::read_to_string(t_path).map_err(|e| Error::io(t_path, e))?;
        let s_raw = fs::read_to_string(s_path).map_err(|e| Error::io(s_path, e))?;
        let transcript = match Transcript::from_text(stem.clone(), &t_raw) {
            Ok(t) => t,
            Err(Error::EmptyDocument) => {
                warnings.push(format!("transcript {stem} is empty; skipped"));
                continue;
            }
            Err(e) => return Err(e),
        };
        let Some(summary) = BulletSummary::from_text(stem.clone(), &s_raw) else {
            warnings.push(format!("summary {stem} has no bullets; skipped"));
            continue;
        };
        documents.push(Document {
            transcript,
            summary,
        });
    }
    for stem in summaries.keys() {
        if !transcripts.contains_key(stem) {
            warnings.push(format!("summary {stem} has no matching transcript"));
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    let mut corpus = Corpus::new(documents)?;
    corpus.warnings = warnings;
    Ok(corpus)
}

fn list_txt(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = BTreeMap::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if !path.is_file() || path.extension().and_then(|e| e.to_str()) != Some("txt") {
            continue;
        }
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            out.insert(stem.to_string(), path);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSplit {
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
    pub seed: u64,
}

/// Seeded 7:1:2 split. Sizes are `floor(0.7n)`, `floor(0.1n)` and the
/// remainder; each list is sorted by id.
pub fn split_corpus(corpus: &Corpus, seed: u64) -> Result<CorpusSplit> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut ids = corpus.ids();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    let n = ids.len();
    let n_train = n * 7 / 10;
    let n_val = n / 10;
    let mut test = ids.split_off(n_train + n_val);
    let mut val = ids.split_off(n_train);
    let mut train = ids;
    train.sort();
    val.sort();
    test.sort();
    Ok(CorpusSplit {
        train,
        val,
        test,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub documents: usize,
    pub total_doc_words: usize,
    pub total_summary_words: usize,
    pub mean_doc_words: f64,
    pub compression_ratio: f64,
}

pub fn corpus_stats(corpus: &Corpus) -> Result<CorpusStats> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let total_doc_words: usize = corpus.documents.iter().map(|d| d.transcript.word_count).sum();
    let total_summary_words: usize = corpus.documents.iter().map(|d| d.summary.word_count()).sum();
    if total_summary_words == 0 {
        return Err(Error::DivisionDegenerate("summary word total is zero"));
    }
    Ok(CorpusStats {
        documents: corpus.len(),
        total_doc_words,
        total_summary_words,
        mean_doc_words: total_doc_words as f64 / corpus.len() as f64,
        compression_ratio: total_doc_words as f64 / total_summary_words as f64,
    })
}
