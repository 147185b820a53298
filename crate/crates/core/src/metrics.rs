//! ROUGE-1/2/L, numeric precision against the source transcript, and
//! corpus-level reporting.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::OnceLock;

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::{BulletSummary, Transcript};
use crate::error::{Error, Result};
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    pub fn from_counts(overlap: usize, candidate_len: usize, reference_len: usize) -> Self {
        let precision = if candidate_len > 0 {
            overlap as f64 / candidate_len as f64
        } else {
            0.0
        };
        let recall = if reference_len > 0 {
            overlap as f64 / reference_len as f64
        } else {
            0.0
        };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            precision,
            recall,
            f1,
        }
    }
}

/// Lowercased letter/digit runs; decimal points inside numbers are kept.
pub fn rouge_tokenize(text: &str) -> Vec<String> {
    text::tokenize(text)
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram overlap (`n >= 1`).
pub fn rouge_n(candidate: &str, reference: &str, n: usize) -> RougeScore {
    assert!(n >= 1, "rouge_n requires n >= 1");
    let cand = rouge_tokenize(candidate);
    let refr = rouge_tokenize(reference);
    let cand_counts = ngram_counts(&cand, n);
    let ref_counts = ngram_counts(&refr, n);
    let overlap: usize = cand_counts
        .iter()
        .map(|(g, &c)| c.min(ref_counts.get(g).copied().unwrap_or(0)))
        .sum();
    let cand_total = cand.len().saturating_sub(n - 1);
    let ref_total = refr.len().saturating_sub(n - 1);
    RougeScore::from_counts(overlap, cand_total, ref_total)
}

pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// LCS over the full token sequences of both texts.
pub fn rouge_l(candidate: &str, reference: &str) -> RougeScore {
    let cand = rouge_tokenize(candidate);
    let refr = rouge_tokenize(reference);
    RougeScore::from_counts(lcs_len(&cand, &refr), cand.len(), refr.len())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NumberToken {
    pub normalized: String,
    pub raw: String,
    pub char_offset: usize,
}

fn number_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\$?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?%?").expect("valid regex"))
}

/// Standalone numeric expressions; digits glued to letters (`q2`, `fy2021`)
/// are not numbers.
pub fn extract_numbers(text: &str) -> Vec<NumberToken> {
    let mut out = Vec::new();
    for m in number_regex().find_iter(text) {
        let before = text[..m.start()].chars().next_back();
        let after = text[m.end()..].chars().next();
        if before.is_some_and(char::is_alphanumeric) || after.is_some_and(char::is_alphanumeric) {
            continue;
        }
        let raw = m.as_str();
        let normalized: String = raw.chars().filter(|c| !matches!(c, '$' | ',' | '%')).collect();
        out.push(NumberToken {
            normalized,
            raw: raw.to_string(),
            char_offset: text[..m.start()].chars().count(),
        });
    }
    out
}

fn number_set<'a>(texts: impl IntoIterator<Item = &'a str>) -> BTreeSet<String> {
    texts
        .into_iter()
        .flat_map(extract_numbers)
        .map(|n| n.normalized)
        .collect()
}

/// Fraction of distinct candidate numbers that also occur in the source;
/// 1.0 when the candidate has no numbers.
pub fn num_prec(candidate: &str, source: &Transcript) -> f64 {
    let cand = number_set([candidate]);
    if cand.is_empty() {
        return 1.0;
    }
    let src = number_set(source.sentences.iter().map(|s| s.text.as_str()));
    cand.intersection(&src).count() as f64 / cand.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentScores {
    pub id: String,
    pub rouge1: RougeScore,
    pub rouge2: RougeScore,
    #[serde(rename = "rougeL")]
    pub rouge_l: RougeScore,
    pub num_prec: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub documents: usize,
    pub rouge1: RougeScore,
    pub rouge2: RougeScore,
    #[serde(rename = "rougeL")]
    pub rouge_l: RougeScore,
    pub num_prec: f64,
    /// Reserved; requires an external contextual-embedding model.
    pub bert_score: Option<f64>,
    /// Reserved; requires an external NLI model.
    pub summac: Option<f64>,
    pub per_document: Vec<DocumentScores>,
}

pub fn score_document(
    id: &str,
    prediction: &[String],
    reference: &BulletSummary,
    source: &Transcript,
) -> DocumentScores {
    let cand = prediction.join("\n");
    let refr = reference.joined();
    DocumentScores {
        id: id.to_string(),
        rouge1: rouge_n(&cand, &refr, 1),
        rouge2: rouge_n(&cand, &refr, 2),
        rouge_l: rouge_l(&cand, &refr),
        num_prec: num_prec(&cand, source),
    }
}

fn mean_score(scores: impl Iterator<Item = RougeScore> + Clone, n: f64) -> RougeScore {
    RougeScore {
        precision: scores.clone().map(|s| s.precision).sum::<f64>() / n,
        recall: scores.clone().map(|s| s.recall).sum::<f64>() / n,
        f1: scores.map(|s| s.f1).sum::<f64>() / n,
    }
}

/// Unweighted per-document means over aligned prediction/reference/source maps.
pub fn evaluate_corpus(
    predictions: &BTreeMap<String, Vec<String>>,
    references: &BTreeMap<String, BulletSummary>,
    sources: &BTreeMap<String, Transcript>,
) -> Result<MetricsReport> {
    let all: BTreeSet<&String> = predictions
        .keys()
        .chain(references.keys())
        .chain(sources.keys())
        .collect();
    let missing = |m: &dyn Fn(&String) -> bool| -> Vec<String> {
        all.iter().filter(|id| !m(id)).map(|id| id.to_string()).collect()
    };
    let missing_predictions = missing(&|id| predictions.contains_key(id));
    let missing_references = missing(&|id| references.contains_key(id));
    let missing_sources = missing(&|id| sources.contains_key(id));
    if all.is_empty()
        || !missing_predictions.is_empty()
        || !missing_references.is_empty()
        || !missing_sources.is_empty()
    {
        return Err(Error::Alignment {
            missing_predictions,
            missing_references,
            missing_sources,
        });
    }

    let per_document: Vec<DocumentScores> = predictions
        .par_iter()
        .map(|(id, pred)| score_document(id, pred, &references[id], &sources[id]))
        .collect();
    let n = per_document.len() as f64;
    Ok(MetricsReport {
        documents: per_document.len(),
        rouge1: mean_score(per_document.iter().map(|d| d.rouge1), n),
        rouge2: mean_score(per_document.iter().map(|d| d.rouge2), n),
        rouge_l: mean_score(per_document.iter().map(|d| d.rouge_l), n),
        num_prec: per_document.iter().map(|d| d.num_prec).sum::<f64>() / n,
        bert_score: None,
        summac: None,
        per_document,
    })
}

impl MetricsReport {
    /// Plain-text table with the conventional column names; unpopulated
    /// metrics print as `-`.
    pub fn to_table(&self, model: &str) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"));
        let header = [
            "Model",
            "ROUGE-1",
            "ROUGE-2",
            "ROUGE-L",
            "BERTScore",
            "Num-Prec.",
            "SummaC_CONV",
        ];
        let row = [
            model.to_string(),
            format!("{:.3}", self.rouge1.f1),
            format!("{:.3}", self.rouge2.f1),
            format!("{:.3}", self.rouge_l.f1),
            opt(self.bert_score),
            format!("{:.3}", self.num_prec),
            opt(self.summac),
        ];
        let widths: Vec<usize> = header
            .iter()
            .zip(&row)
            .map(|(h, r)| h.len().max(r.len()))
            .collect();
        let mut out = String::new();
        let line = |cells: &[String]| -> String {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join(" | ")
        };
        let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(out, "{}", line(&header));
        let _ = writeln!(
            out,
            "{}",
            widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-")
        );
        let _ = writeln!(out, "{}", line(&row));
        out
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "id", "rouge1_p", "rouge1_r", "rouge1_f1", "rouge2_p", "rouge2_r", "rouge2_f1",
            "rougeL_p", "rougeL_r", "rougeL_f1", "num_prec",
        ])?;
        for d in &self.per_document {
            let mut rec = vec![d.id.clone()];
            for s in [d.rouge1, d.rouge2, d.rouge_l] {
                rec.extend([s.precision, s.recall, s.f1].map(|x| x.to_string()));
            }
            rec.push(d.num_prec.to_string());
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
