//! Blocking JSON-over-HTTP clients for the external question-generation,
//! embedding and generation services.
//!
//! | endpoint        | request                                  | response                  |
//! |-----------------|------------------------------------------|---------------------------|
//! | `/v1/question`  | `{"sentence": str}`                      | `{"question": str}`       |
//! | `/v1/embed`     | `{"texts": [str]}`                       | `{"vectors": [[f64]]}`    |
//! | `/v1/generate`  | `{"prompt": str, "max_new_tokens": int}` | `{"text": str}`           |
//!
//! Any non-200 status or transport failure is reported as
//! [`Error::ServiceUnavailable`]; a 200 whose body does not match the schema
//! is [`Error::MalformedResponse`].

use std::time::Duration;

use reqwest::blocking::Client;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::GenClient;
use crate::qbank::QgClient;
use crate::retrieval::Embedder;

pub const QG_URL_ENV: &str = "FINBPS_QG_URL";
pub const EMBED_URL_ENV: &str = "FINBPS_EMBED_URL";
pub const GENERATE_URL_ENV: &str = "FINBPS_GENERATE_URL";

#[derive(Debug, Clone)]
struct JsonService {
    client: Client,
    base_url: String,
}

impl JsonService {
    fn new(base_url: &str, timeout: Duration) -> Result<Self> {
        let client = Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::ServiceUnavailable(format!("building http client: {e}")))?;
        Ok(Self {
            client,
            base_url: base_url.trim_end_matches('/').to_string(),
        })
    }

    fn post<Req: Serialize, Resp: DeserializeOwned>(&self, path: &str, body: &Req) -> Result<Resp> {
        let url = format!("{}{path}", self.base_url);
        let resp = self
            .client
            .post(&url)
            .json(body)
            .send()
            .map_err(|e| Error::ServiceUnavailable(format!("{url}: {e}")))?;
        let status = resp.status();
        if status != reqwest::StatusCode::OK {
            return Err(Error::ServiceUnavailable(format!("{url}: HTTP {status}")));
        }
        let bytes = resp
            .bytes()
            .map_err(|e| Error::ServiceUnavailable(format!("{url}: reading body: {e}")))?;
        serde_json::from_slice(&bytes).map_err(|e| Error::MalformedResponse(format!("{url}: {e}")))
    }
}

const DEFAULT_TIMEOUT: Duration = Duration::from_secs(120);

#[derive(Serialize)]
struct QuestionRequest<'a> {
    sentence: &'a str,
}

#[derive(Deserialize)]
struct QuestionResponse {
    question: String,
}

#[derive(Debug, Clone)]
pub struct HttpQgClient {
    inner: JsonService,
}

impl HttpQgClient {
    pub fn new(base_url: &str) -> Result<Self> {
        Ok(Self {
            inner: JsonService::new(base_url, DEFAULT_TIMEOUT)?,
        })
    }
}

impl QgClient for HttpQgClient {
    fn question(&self, sentence: &str) -> Result<String> {
        let resp: QuestionResponse = self.inner.post("/v1/question", &QuestionRequest { sentence })?;
        Ok(resp.question)
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
}

/// Sends every text of a call in one request; `fit_corpus` is not transmitted.
#[derive(Debug, Clone)]
pub struct HttpEmbedder {
    inner: JsonService,
}

impl HttpEmbedder {
    pub fn new(base_url: &str) -> Result<Self> {
        Ok(Self {
            inner: JsonService::new(base_url, DEFAULT_TIMEOUT)?,
        })
    }
}

impl Embedder for HttpEmbedder {
    fn embed(&self, texts: &[&str], _fit_corpus: &[&str]) -> Result<Vec<Vec<f64>>> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let resp: EmbedResponse = self.inner.post("/v1/embed", &EmbedRequest { texts })?;
        if resp.vectors.len() != texts.len() {
            return Err(Error::MalformedResponse(format!(
                "expected {} vectors, got {}",
                texts.len(),
                resp.vectors.len()
            )));
        }
        let dim = resp.vectors[0].len();
        if resp.vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::MalformedResponse("vectors in one response differ in dimension".into()));
        }
        Ok(resp.vectors)
    }
}

#[derive(Serialize)]
struct GenerateRequest<'a> {
    prompt: &'a str,
    max_new_tokens: usize,
}

#[derive(Deserialize)]
struct GenerateResponse {
    text: String,
}

#[derive(Debug, Clone)]
pub struct HttpGenClient {
    inner: JsonService,
}

impl HttpGenClient {
    pub fn new(base_url: &str) -> Result<Self> {
        Ok(Self {
            inner: JsonService::new(base_url, DEFAULT_TIMEOUT)?,
        })
    }
}

impl GenClient for HttpGenClient {
    fn complete(&self, prompt: &str, max_new_tokens: usize) -> Result<String> {
        let resp: GenerateResponse = self.inner.post(
            "/v1/generate",
            &GenerateRequest {
                prompt,
                max_new_tokens,
            },
        )?;
        Ok(resp.text)
    }
}
