//! Abstractive stage plumbing: prompt construction, the generation client
//! contract with an offline mock, and instruction-tuning export.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{segment_sentences, BulletSummary};
use crate::error::{Error, Result};
use crate::retrieval::ExtractiveContext;

pub const DEFAULT_INSTRUCTION: &str = "summarize the following earnings call context into concise bullet points covering the key financial figures.";
pub const DEFAULT_SEPARATOR: &str = "\n\n";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub instruction: String,
    pub separator: String,
}

impl Default for PromptTemplate {
    fn default() -> Self {
        Self {
            instruction: DEFAULT_INSTRUCTION.to_string(),
            separator: DEFAULT_SEPARATOR.to_string(),
        }
    }
}

impl PromptTemplate {
    pub fn new(instruction: impl Into<String>, separator: impl Into<String>) -> Result<Self> {
        let instruction = instruction.into().trim().to_string();
        if instruction.is_empty() {
            return Err(Error::ConfigInvalid("instruction must be non-empty".into()));
        }
        Ok(Self {
            instruction,
            separator: separator.into(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub prompt: String,
    pub max_new_tokens: usize,
    pub max_input_tokens: usize,
}

impl GenerationRequest {
    pub fn new(prompt: impl Into<String>) -> Self {
        Self {
            prompt: prompt.into(),
            max_new_tokens: 60,
            max_input_tokens: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FineTuneSpec {
    pub base_model: String,
    pub method: String,
    pub lora_rank: u32,
    pub learning_rate: f64,
    pub epochs: u32,
    pub trainable_fraction: f64,
}

impl Default for FineTuneSpec {
    fn default() -> Self {
        Self {
            base_model: "flan-t5-large".into(),
            method: "lora".into(),
            lora_rank: 2,
            learning_rate: 5e-4,
            epochs: 10,
            trainable_fraction: 0.0008,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub text: String,
    /// Context tokens dropped to respect the input limit.
    pub truncated_tokens: usize,
}

/// `instruction + separator + context`, with the context cut so the whole
/// prompt stays within `max_input_tokens` whitespace tokens. The instruction
/// itself is never cut.
pub fn build_prompt(
    template: &PromptTemplate,
    context: &ExtractiveContext,
    max_input_tokens: usize,
) -> Result<Prompt> {
    if context.is_empty() {
        return Err(Error::EmptyContext);
    }
    let instruction_tokens = template.instruction.split_whitespace().count();
    let budget = max_input_tokens.saturating_sub(instruction_tokens);
    let text = context.text();
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let truncated_tokens = tokens.len().saturating_sub(budget);
    let body = if truncated_tokens > 0 {
        log::warn!(
            "prompt for {} truncated: {} of {} context tokens dropped (limit {max_input_tokens})",
            context.doc_id,
            truncated_tokens,
            tokens.len()
        );
        tokens[..budget].join(" ")
    } else {
        text
    };
    Ok(Prompt {
        text: format!("{}{}{}", template.instruction, template.separator, body),
        truncated_tokens,
    })
}

/// A text generation backend: prompt in, raw completion out.
pub trait GenClient: Send + Sync {
    fn complete(&self, prompt: &str, max_new_tokens: usize) -> Result<String>;
}

/// Sends the request and splits the completion into one bullet per non-blank line.
pub fn generate(client: &dyn GenClient, request: &GenerationRequest) -> Result<Vec<String>> {
    let text = client.complete(&request.prompt, request.max_new_tokens)?;
    let bullets: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect();
    if bullets.is_empty() {
        return Err(Error::EmptyGeneration);
    }
    Ok(bullets)
}

/// Offline stand-in for a generation service: echoes the first four context
/// sentences, each cut to twelve whitespace tokens.
#[derive(Debug, Clone)]
pub struct MockGenerator {
    pub separator: String,
}

impl Default for MockGenerator {
    fn default() -> Self {
        Self {
            separator: DEFAULT_SEPARATOR.to_string(),
        }
    }
}

const MOCK_MAX_BULLETS: usize = 4;
const MOCK_MAX_TOKENS: usize = 12;

impl MockGenerator {
    pub fn new(separator: impl Into<String>) -> Self {
        Self {
            separator: separator.into(),
        }
    }

    pub fn mock_generate(&self, request: &GenerationRequest) -> Result<Vec<String>> {
        let Some((_, context)) = request.prompt.split_once(&self.separator) else {
            return Err(Error::MalformedPrompt(self.separator.clone()));
        };
        let sentences = match segment_sentences(context) {
            Ok(s) => s,
            Err(Error::EmptyDocument) => return Ok(Vec::new()),
            Err(e) => return Err(e),
        };
        Ok(sentences
            .into_iter()
            .take(MOCK_MAX_BULLETS)
            .map(|s| {
                s.text
                    .split_whitespace()
                    .take(MOCK_MAX_TOKENS)
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect())
    }
}

impl GenClient for MockGenerator {
    fn complete(&self, prompt: &str, max_new_tokens: usize) -> Result<String> {
        let request = GenerationRequest {
            prompt: prompt.to_string(),
            max_new_tokens,
            max_input_tokens: usize::MAX,
        };
        Ok(self.mock_generate(&request)?.join("\n"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FineTuneRecord {
    pub instruction: String,
    pub input: String,
    pub output: String,
}

pub const FINETUNE_SPEC_FILE: &str = "finetune_spec.json";

/// Writes one JSON line per (context, target summary) pair to `out` and the
/// training configuration to `finetune_spec.json` next to it. Returns the
/// sidecar path.
pub fn export_finetune_dataset(
    pairs: &[(ExtractiveContext, BulletSummary)],
    template: &PromptTemplate,
    spec: &FineTuneSpec,
    out: &Path,
) -> Result<PathBuf> {
    let file = File::create(out).map_err(|e| Error::io(out, e))?;
    let mut w = BufWriter::new(file);
    for (context, summary) in pairs {
        let record = FineTuneRecord {
            instruction: template.instruction.clone(),
            input: context.text(),
            output: summary.bullets.join("\n"),
        };
        let line = serde_json::to_string(&record).map_err(|e| Error::json("fine-tune record", e))?;
        writeln!(w, "{line}").map_err(|e| Error::io(out, e))?;
    }
    w.flush().map_err(|e| Error::io(out, e))?;

    let sidecar = out
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(FINETUNE_SPEC_FILE);
    let json = serde_json::to_string_pretty(spec).map_err(|e| Error::json("fine-tune spec", e))?;
    fs::write(&sidecar, json + "\n").map_err(|e| Error::io(&sidecar, e))?;
    Ok(sidecar)
}
