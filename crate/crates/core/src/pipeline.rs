//! Staged pipeline over a workspace directory.
//!
//! Every stage reads its upstream artifacts from `<workspace>/<stage>/` and
//! writes its own directory atomically (temp directory + rename). Layout:
//!
//! ```text
//! <workspace>/
//!   config.json            effective configuration and its hash
//!   ingest/   corpus.json split.json stats.json
//!   qgen/     question_bank.json report.json
//!   topics/   model.json question_bank.json distribution.json
//!   extract/  contexts.json finetune.jsonl finetune_spec.json
//!   route/    detections.json questions.json contexts.json
//!   generate/ prompts.json predictions.json
//!   eval/     metrics.json metrics.txt per_document.csv
//! ```
//!
//! Each stage directory also carries a `manifest.json` naming the stage and
//! the config hash it ran under.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{corpus_stats, load_corpus, split_corpus, BulletSummary, Corpus, CorpusSplit, Transcript};
use crate::error::{Error, Result};
use crate::generator::{
    build_prompt, export_finetune_dataset, generate, FineTuneSpec, GenClient, GenerationRequest, MockGenerator,
    PromptTemplate, DEFAULT_SEPARATOR,
};
use crate::metrics::evaluate_corpus;
use crate::qbank::{build_question_bank, Question, QuestionBank, QuestionSource};
use crate::retrieval::{build_context, Embedder, ExtractiveContext, TfidfEmbedder};
use crate::router::{detect_topics, select_questions, TopicDetection};
use crate::service::{HttpEmbedder, HttpGenClient, HttpQgClient, EMBED_URL_ENV, GENERATE_URL_ENV, QG_URL_ENV};
use crate::text::StopWords;
use crate::topics::{categorize_questions, fit_lda, question_distribution, topic_keywords, LdaParams, TopicKeywords, TopicModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Sentences retrieved per question.
    pub k: usize,
    pub num_topics: usize,
    pub keywords_per_topic: usize,
    pub q_per_topic: usize,
    pub lda_iters: usize,
    pub lda_seed: u64,
    /// `None` means `50 / num_topics`.
    pub lda_alpha: Option<f64>,
    pub lda_beta: f64,
    pub split_seed: u64,
    pub max_input_tokens: usize,
    pub max_new_tokens: usize,
    pub qg_url: Option<String>,
    pub embed_url: Option<String>,
    pub generate_url: Option<String>,
    /// Answer failed question-service requests with the template rule.
    pub qg_fallback: bool,
    pub instruction_file: Option<PathBuf>,
    pub separator: String,
    pub stopwords_file: Option<PathBuf>,
    /// Use the full master list when a test transcript triggers no topic.
    pub fallback_on_empty_detection: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            k: 3,
            num_topics: 30,
            keywords_per_topic: 10,
            q_per_topic: 2,
            lda_iters: 1000,
            lda_seed: 42,
            lda_alpha: None,
            lda_beta: 0.01,
            split_seed: 42,
            max_input_tokens: 128,
            max_new_tokens: 60,
            qg_url: None,
            embed_url: None,
            generate_url: None,
            qg_fallback: false,
            instruction_file: None,
            separator: DEFAULT_SEPARATOR.to_string(),
            stopwords_file: None,
            fallback_on_empty_detection: false,
        }
    }
}

impl PipelineConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&raw).map_err(|e| Error::ConfigInvalid(format!("{}: {e}", path.display())))
    }

    /// Service URLs from the environment replace configured ones.
    pub fn apply_env(&mut self) {
        let read = |name: &str| std::env::var(name).ok().filter(|v| !v.trim().is_empty());
        if let Some(v) = read(QG_URL_ENV) {
            self.qg_url = Some(v);
        }
        if let Some(v) = read(EMBED_URL_ENV) {
            self.embed_url = Some(v);
        }
        if let Some(v) = read(GENERATE_URL_ENV) {
            self.generate_url = Some(v);
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.split_seed = seed;
        self.lda_seed = seed;
    }

    pub fn validate(&self) -> Result<()> {
        let knobs = [
            ("k", self.k),
            ("num_topics", self.num_topics),
            ("keywords_per_topic", self.keywords_per_topic),
            ("q_per_topic", self.q_per_topic),
            ("lda_iters", self.lda_iters),
            ("max_input_tokens", self.max_input_tokens),
            ("max_new_tokens", self.max_new_tokens),
        ];
        for (name, v) in knobs {
            if v < 1 {
                return Err(Error::ConfigInvalid(format!("{name} must be >= 1")));
            }
        }
        if self.lda_alpha.is_some_and(|a| !(a > 0.0)) || !(self.lda_beta > 0.0) {
            return Err(Error::ConfigInvalid("lda_alpha and lda_beta must be positive".into()));
        }
        if self.separator.is_empty() {
            return Err(Error::ConfigInvalid("separator must be non-empty".into()));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn lda_params(&self) -> LdaParams {
        let mut p = LdaParams::with_defaults(self.num_topics, self.lda_seed);
        if let Some(a) = self.lda_alpha {
            p.alpha = a;
        }
        p.beta = self.lda_beta;
        p.iterations = self.lda_iters;
        p
    }

    pub fn template(&self) -> Result<PromptTemplate> {
        match &self.instruction_file {
            Some(path) => {
                let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                PromptTemplate::new(raw, self.separator.clone())
            }
            None => Ok(PromptTemplate {
                separator: self.separator.clone(),
                ..PromptTemplate::default()
            }),
        }
    }

    pub fn stopwords(&self) -> Result<StopWords> {
        match &self.stopwords_file {
            Some(path) => {
                let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                Ok(StopWords::parse(&raw))
            }
            None => Ok(StopWords::default()),
        }
    }

    pub fn embedder(&self) -> Result<Box<dyn Embedder>> {
        Ok(match &self.embed_url {
            Some(url) => Box::new(HttpEmbedder::new(url)?),
            None => Box::new(TfidfEmbedder),
        })
    }

    pub fn gen_client(&self) -> Result<Box<dyn GenClient>> {
        Ok(match &self.generate_url {
            Some(url) => Box::new(HttpGenClient::new(url)?),
            None => Box::new(MockGenerator::new(self.separator.clone())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Ingest,
    Qgen,
    Topics,
    Extract,
    Route,
    Generate,
    Eval,
    Run,
}

impl Stage {
    pub const SEQUENCE: [Stage; 7] = [
        Stage::Ingest,
        Stage::Qgen,
        Stage::Topics,
        Stage::Extract,
        Stage::Route,
        Stage::Generate,
        Stage::Eval,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Qgen => "qgen",
            Stage::Topics => "topics",
            Stage::Extract => "extract",
            Stage::Route => "route",
            Stage::Generate => "generate",
            Stage::Eval => "eval",
            Stage::Run => "run",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::SEQUENCE
            .into_iter()
            .chain([Stage::Run])
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::ConfigInvalid(format!("unknown stage {s:?}")))
    }
}

/// Paths a stage may need beyond the workspace.
#[derive(Debug, Clone, Default)]
pub struct StageInputs {
    pub transcripts_dir: Option<PathBuf>,
    pub summaries_dir: Option<PathBuf>,
    /// Evaluate this predictions file instead of `generate/predictions.json`.
    pub predictions: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    stage: String,
    config_hash: String,
    files: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageOutcome {
    pub stage: &'static str,
    pub config_hash: String,
    pub outputs: Vec<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct Workspace {
    root: PathBuf,
}

fn to_json<T: Serialize>(value: &T, what: &str) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::json(what, e))?;
    bytes.push(b'\n');
    Ok(bytes)
}

impl Workspace {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn stage_dir(&self, stage: Stage) -> PathBuf {
        self.root.join(stage.name())
    }

    pub fn artifact(&self, stage: Stage, file: &str) -> PathBuf {
        self.stage_dir(stage).join(file)
    }

    pub fn read_json<T: DeserializeOwned>(&self, stage: Stage, file: &str) -> Result<T> {
        read_json_file(&self.artifact(stage, file))
    }

    /// Runs `fill` against a fresh temporary directory, adds the manifest and
    /// swaps it into place as the stage directory.
    fn write_stage(
        &self,
        stage: Stage,
        config_hash: &str,
        fill: impl FnOnce(&Path) -> Result<()>,
    ) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(&self.root).map_err(|e| Error::io(&self.root, e))?;
        let tmp = self.root.join(format!(".{}.tmp", stage.name()));
        if tmp.exists() {
            fs::remove_dir_all(&tmp).map_err(|e| Error::io(&tmp, e))?;
        }
        fs::create_dir_all(&tmp).map_err(|e| Error::io(&tmp, e))?;
        if let Err(e) = fill(&tmp) {
            let _ = fs::remove_dir_all(&tmp);
            return Err(e);
        }

        let mut files: Vec<String> = fs::read_dir(&tmp)
            .map_err(|e| Error::io(&tmp, e))?
            .filter_map(|e| e.ok())
            .filter_map(|e| e.file_name().into_string().ok())
            .collect();
        files.sort();
        let manifest = Manifest {
            stage: stage.name().to_string(),
            config_hash: config_hash.to_string(),
            files: files.clone(),
        };
        let mpath = tmp.join("manifest.json");
        fs::write(&mpath, to_json(&manifest, "manifest")?).map_err(|e| Error::io(&mpath, e))?;

        let dest = self.stage_dir(stage);
        if dest.exists() {
            fs::remove_dir_all(&dest).map_err(|e| Error::io(&dest, e))?;
        }
        fs::rename(&tmp, &dest).map_err(|e| Error::io(&dest, e))?;
        Ok(files.into_iter().map(|f| dest.join(f)).collect())
    }

    fn write_config(&self, config: &PipelineConfig) -> Result<()> {
        #[derive(Serialize)]
        struct Emitted<'a> {
            config_hash: String,
            config: &'a PipelineConfig,
        }
        fs::create_dir_all(&self.root).map_err(|e| Error::io(&self.root, e))?;
        let path = self.root.join("config.json");
        let tmp = self.root.join(".config.json.tmp");
        let body = to_json(
            &Emitted {
                config_hash: config.hash(),
                config,
            },
            "config",
        )?;
        fs::write(&tmp, body).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
    }
}

pub fn read_json_file<T: DeserializeOwned>(path: &Path) -> Result<T> {
    if !path.exists() {
        return Err(Error::MissingArtifact(path.to_path_buf()));
    }
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&raw).map_err(|e| Error::json(path.display().to_string(), e))
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))
}

/// Serialized topic model plus its keyword lists.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopicModelFile {
    #[serde(flatten)]
    pub model: TopicModel,
    pub keywords: Vec<Vec<String>>,
}

impl TopicModelFile {
    pub fn keywords(&self) -> TopicKeywords {
        TopicKeywords {
            topics: self.keywords.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QgenReport {
    pub generator: String,
    pub train_documents: usize,
    pub per_doc_questions: usize,
    pub master_questions: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PromptRecord {
    pub doc_id: String,
    pub prompt: String,
    pub truncated_tokens: usize,
}

/// Runs one stage (or the whole chain for [`Stage::Run`]).
pub fn run_stage(
    stage: Stage,
    config: &PipelineConfig,
    workspace: &Workspace,
    inputs: &StageInputs,
) -> Result<Vec<StageOutcome>> {
    config.validate()?;
    workspace.write_config(config)?;
    if stage == Stage::Run {
        return Stage::SEQUENCE
            .into_iter()
            .map(|s| run_single(s, config, workspace, inputs))
            .collect();
    }
    Ok(vec![run_single(stage, config, workspace, inputs)?])
}

fn run_single(stage: Stage, config: &PipelineConfig, ws: &Workspace, inputs: &StageInputs) -> Result<StageOutcome> {
    let hash = config.hash();
    log::info!("stage {stage} starting (config {hash})");
    let result = match stage {
        Stage::Ingest => ingest(config, ws, inputs, &hash),
        Stage::Qgen => qgen(config, ws, &hash),
        Stage::Topics => topics(config, ws, &hash),
        Stage::Extract => extract(config, ws, &hash),
        Stage::Route => route(config, ws, &hash),
        Stage::Generate => generate_stage(config, ws, &hash),
        Stage::Eval => eval(ws, inputs, &hash),
        Stage::Run => unreachable!("run is expanded by run_stage"),
    };
    let outputs = result.map_err(|e| e.in_stage(stage.name()))?;
    log::info!("stage {stage} wrote {} files", outputs.len());
    Ok(StageOutcome {
        stage: stage.name(),
        config_hash: hash,
        outputs,
    })
}

fn ingest(config: &PipelineConfig, ws: &Workspace, inputs: &StageInputs, hash: &str) -> Result<Vec<PathBuf>> {
    let (Some(t), Some(s)) = (&inputs.transcripts_dir, &inputs.summaries_dir) else {
        return Err(Error::ConfigInvalid("ingest requires --transcripts and --summaries".into()));
    };
    let corpus = load_corpus(t, s)?;
    let split = split_corpus(&corpus, config.split_seed)?;
    let stats = corpus_stats(&corpus)?;
    ws.write_stage(Stage::Ingest, hash, |dir| {
        write_file(dir, "corpus.json", &to_json(&corpus, "corpus")?)?;
        write_file(dir, "split.json", &to_json(&split, "split")?)?;
        write_file(dir, "stats.json", &to_json(&stats, "stats")?)
    })
}

fn load_ingest(ws: &Workspace) -> Result<(Corpus, CorpusSplit)> {
    Ok((ws.read_json(Stage::Ingest, "corpus.json")?, ws.read_json(Stage::Ingest, "split.json")?))
}

fn qgen(config: &PipelineConfig, ws: &Workspace, hash: &str) -> Result<Vec<PathBuf>> {
    let (corpus, split) = load_ingest(ws)?;
    let train: Vec<BulletSummary> = corpus.select(&split.train).map(|d| d.summary.clone()).collect();
    let client = config.qg_url.as_deref().map(HttpQgClient::new).transpose()?;
    let source = match &client {
        Some(c) => QuestionSource::External {
            client: c,
            fallback: config.qg_fallback,
        },
        None => QuestionSource::Template,
    };
    let bank = build_question_bank(&train, source)?;
    let report = QgenReport {
        generator: if client.is_some() { "external" } else { "template" }.to_string(),
        train_documents: train.len(),
        per_doc_questions: bank.total_per_doc(),
        master_questions: bank.master.len(),
    };
    log::info!("question bank: {} master questions", report.master_questions);
    ws.write_stage(Stage::Qgen, hash, |dir| {
        write_file(dir, "question_bank.json", &to_json(&bank, "question bank")?)?;
        write_file(dir, "report.json", &to_json(&report, "qgen report")?)
    })
}

fn topics(config: &PipelineConfig, ws: &Workspace, hash: &str) -> Result<Vec<PathBuf>> {
    let bank: QuestionBank = ws.read_json(Stage::Qgen, "question_bank.json")?;
    let stopwords = config.stopwords()?;
    let model = fit_lda(&bank.master, &config.lda_params(), &stopwords)?;
    let keywords = topic_keywords(&model, config.keywords_per_topic.min(model.vocab.len()))?;
    let categorized = categorize_questions(&bank, &keywords);
    let distribution = question_distribution(&categorized)?;
    let file = TopicModelFile {
        model,
        keywords: keywords.topics,
    };
    ws.write_stage(Stage::Topics, hash, |dir| {
        write_file(dir, "model.json", &to_json(&file, "topic model")?)?;
        write_file(dir, "question_bank.json", &to_json(&categorized, "question bank")?)?;
        write_file(dir, "distribution.json", &to_json(&distribution, "distribution")?)
    })
}

fn extract(config: &PipelineConfig, ws: &Workspace, hash: &str) -> Result<Vec<PathBuf>> {
    let (corpus, split) = load_ingest(ws)?;
    let bank: QuestionBank = ws.read_json(Stage::Topics, "question_bank.json")?;
    let embedder = config.embedder()?;
    let template = config.template()?;

    let docs: Vec<_> = corpus
        .select(&split.train)
        .filter(|d| bank.n_of(&d.transcript.id) > 0)
        .collect();
    let pairs: Vec<(ExtractiveContext, BulletSummary)> = docs
        .par_iter()
        .map(|d| {
            let questions = &bank.per_doc[&d.transcript.id];
            build_context(&d.transcript, questions, config.k, embedder.as_ref()).map(|c| (c, d.summary.clone()))
        })
        .collect::<Result<_>>()?;
    let contexts: Vec<&ExtractiveContext> = pairs.iter().map(|(c, _)| c).collect();

    ws.write_stage(Stage::Extract, hash, |dir| {
        write_file(dir, "contexts.json", &to_json(&contexts, "contexts")?)?;
        export_finetune_dataset(&pairs, &template, &FineTuneSpec::default(), &dir.join("finetune.jsonl"))?;
        Ok(())
    })
}

fn route_document(
    doc: &Transcript,
    keywords: &TopicKeywords,
    bank: &QuestionBank,
    config: &PipelineConfig,
    embedder: &dyn Embedder,
) -> Result<(TopicDetection, Vec<Question>, ExtractiveContext)> {
    let detection = detect_topics(doc, keywords);
    let questions = match select_questions(doc, &detection, bank, config.q_per_topic, embedder) {
        Ok(q) if !q.is_empty() => q,
        Ok(_) | Err(Error::NoTopicsDetected(_)) if config.fallback_on_empty_detection => {
            log::warn!("{}: no routed questions; using full master list", doc.id);
            bank.master.clone()
        }
        Ok(_) => return Err(Error::NoQuestions(doc.id.clone())),
        Err(e) => return Err(e),
    };
    let context = build_context(doc, &questions, config.k, embedder)?;
    Ok((detection, questions, context))
}

fn route(config: &PipelineConfig, ws: &Workspace, hash: &str) -> Result<Vec<PathBuf>> {
    let (corpus, split) = load_ingest(ws)?;
    let model: TopicModelFile = ws.read_json(Stage::Topics, "model.json")?;
    let bank: QuestionBank = ws.read_json(Stage::Topics, "question_bank.json")?;
    let keywords = model.keywords();
    let embedder = config.embedder()?;

    let docs: Vec<_> = corpus.select(&split.test).collect();
    let routed: Vec<_> = docs
        .par_iter()
        .map(|d| route_document(&d.transcript, &keywords, &bank, config, embedder.as_ref()))
        .collect::<Result<_>>()?;

    let detections: Vec<&TopicDetection> = routed.iter().map(|r| &r.0).collect();
    let questions: BTreeMap<&str, Vec<&str>> = routed
        .iter()
        .map(|(d, qs, _)| (d.doc_id.as_str(), qs.iter().map(|q| q.text.as_str()).collect()))
        .collect();
    let contexts: Vec<&ExtractiveContext> = routed.iter().map(|r| &r.2).collect();
    ws.write_stage(Stage::Route, hash, |dir| {
        write_file(dir, "detections.json", &to_json(&detections, "detections")?)?;
        write_file(dir, "questions.json", &to_json(&questions, "questions")?)?;
        write_file(dir, "contexts.json", &to_json(&contexts, "contexts")?)
    })
}

fn generate_stage(config: &PipelineConfig, ws: &Workspace, hash: &str) -> Result<Vec<PathBuf>> {
    let contexts: Vec<ExtractiveContext> = ws.read_json(Stage::Route, "contexts.json")?;
    let template = config.template()?;
    let client = config.gen_client()?;

    let results: Vec<(PromptRecord, Vec<String>)> = contexts
        .par_iter()
        .map(|ctx| {
            let prompt = build_prompt(&template, ctx, config.max_input_tokens)?;
            let request = GenerationRequest {
                prompt: prompt.text.clone(),
                max_new_tokens: config.max_new_tokens,
                max_input_tokens: config.max_input_tokens,
            };
            let bullets = generate(client.as_ref(), &request)?;
            Ok((
                PromptRecord {
                    doc_id: ctx.doc_id.clone(),
                    prompt: prompt.text,
                    truncated_tokens: prompt.truncated_tokens,
                },
                bullets,
            ))
        })
        .collect::<Result<_>>()?;

    let prompts: Vec<&PromptRecord> = results.iter().map(|r| &r.0).collect();
    let predictions: BTreeMap<&str, &Vec<String>> =
        results.iter().map(|(p, b)| (p.doc_id.as_str(), b)).collect();
    ws.write_stage(Stage::Generate, hash, |dir| {
        write_file(dir, "prompts.json", &to_json(&prompts, "prompts")?)?;
        write_file(dir, "predictions.json", &to_json(&predictions, "predictions")?)
    })
}

fn eval(ws: &Workspace, inputs: &StageInputs, hash: &str) -> Result<Vec<PathBuf>> {
    let (corpus, split) = load_ingest(ws)?;
    let predictions: BTreeMap<String, Vec<String>> = match &inputs.predictions {
        Some(path) => read_json_file(path)?,
        None => ws.read_json(Stage::Generate, "predictions.json")?,
    };
    let mut references = BTreeMap::new();
    let mut sources = BTreeMap::new();
    for d in corpus.select(&split.test) {
        references.insert(d.transcript.id.clone(), d.summary.clone());
        sources.insert(d.transcript.id.clone(), d.transcript.clone());
    }
    let report = evaluate_corpus(&predictions, &references, &sources)?;
    ws.write_stage(Stage::Eval, hash, |dir| {
        write_file(dir, "metrics.json", &to_json(&report, "metrics")?)?;
        write_file(dir, "metrics.txt", report.to_table("finbps").as_bytes())?;
        write_file(dir, "per_document.csv", report.to_csv()?.as_bytes())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = PipelineConfig::default();
        assert_eq!((c.k, c.num_topics, c.keywords_per_topic, c.q_per_topic), (3, 30, 10, 2));
        assert_eq!((c.max_input_tokens, c.max_new_tokens), (128, 60));
        assert!(!c.fallback_on_empty_detection);
        let p = c.lda_params();
        assert!((p.alpha - 50.0 / 30.0).abs() < 1e-12);
        assert_eq!(p.beta, 0.01);
        c.validate().unwrap();
    }

    #[test]
    fn partial_config_fills_defaults() {
        let c: PipelineConfig = serde_json::from_str(r#"{"num_topics": 4}"#).unwrap();
        assert_eq!(c.num_topics, 4);
        assert_eq!(c.k, 3);
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn invalid_knobs() {
        let c = PipelineConfig {
            q_per_topic: 0,
            ..PipelineConfig::default()
        };
        assert!(matches!(c.validate(), Err(Error::ConfigInvalid(_))));
    }

    #[test]
    fn hash_tracks_content() {
        let a = PipelineConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.k = 4;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn stage_names_roundtrip() {
        for s in Stage::SEQUENCE.into_iter().chain([Stage::Run]) {
            assert_eq!(s.name().parse::<Stage>().unwrap(), s);
        }
        assert!("bogus".parse::<Stage>().is_err());
    }
}
