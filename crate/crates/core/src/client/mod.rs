//! Chat-completion scoring: one fresh session per request, retries with
//! exponential backoff, a JSONL report store and the repetition-major batch
//! scheduler.

mod batch;
mod http;
pub mod mock;
mod store;

use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Article;
use crate::protocol::PromptPair;

pub use batch::{run_batch, BatchError, BatchSummary, PairFailure};
pub use http::{request_body, HttpBackend};
pub use mock::{mock_generate, MockBackend, MockProfile, QualityModel};
pub use store::{ReportStore, StoreError};

fn default_model_name() -> String {
    "gemma-3-27b-it".into()
}
fn default_endpoint() -> String {
    "http://127.0.0.1:8080/v1/chat/completions".into()
}
fn default_max_tokens() -> u32 {
    4096
}
fn default_repetitions() -> u32 {
    5
}
fn default_parallelism() -> usize {
    4
}
fn default_timeout() -> u64 {
    120
}
fn default_retry_limit() -> u32 {
    3
}
fn default_backoff_base() -> u64 {
    500
}
fn default_backoff_max() -> u64 {
    30_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default = "default_endpoint")]
    pub endpoint_url: String,
    #[serde(default = "default_model_name")]
    pub model_name: String,
    /// Name of the environment variable holding a bearer token, if any.
    #[serde(default)]
    pub api_key_env: Option<String>,
    /// `None` leaves the endpoint default in place.
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default = "default_max_tokens")]
    pub max_output_tokens: u32,
    #[serde(default = "default_repetitions")]
    pub repetitions: u32,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    /// Retries after the first attempt.
    #[serde(default = "default_retry_limit")]
    pub retry_limit: u32,
    #[serde(default = "default_backoff_base")]
    pub backoff_base_ms: u64,
    #[serde(default = "default_backoff_max")]
    pub backoff_max_ms: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            endpoint_url: default_endpoint(),
            model_name: default_model_name(),
            api_key_env: None,
            temperature: None,
            max_output_tokens: default_max_tokens(),
            repetitions: default_repetitions(),
            parallelism: default_parallelism(),
            timeout_secs: default_timeout(),
            retry_limit: default_retry_limit(),
            backoff_base_ms: default_backoff_base(),
            backoff_max_ms: default_backoff_max(),
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.repetitions == 0 {
            return Err("repetitions must be at least 1".into());
        }
        if self.parallelism == 0 {
            return Err("parallelism must be at least 1".into());
        }
        if !(self.endpoint_url.starts_with("http://") || self.endpoint_url.starts_with("https://"))
        {
            return Err(format!("endpoint_url {:?} is not an http(s) URL", self.endpoint_url));
        }
        Ok(())
    }

    /// Delay before retry number `retry` (1-based).
    pub fn backoff(&self, retry: u32) -> Duration {
        let factor = 1u64.checked_shl(retry.saturating_sub(1)).unwrap_or(u64::MAX);
        Duration::from_millis(
            self.backoff_base_ms
                .saturating_mul(factor)
                .min(self.backoff_max_ms),
        )
    }
}

/// One model response for one (article, repetition).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawReport {
    pub article_id: String,
    pub rep_index: u32,
    pub model_id: String,
    pub text: String,
    pub created_at: DateTime<Utc>,
    pub attempt_count: u32,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BackendError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("endpoint returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("endpoint returned an empty response")]
    EmptyResponse,
    #[error("cannot decode endpoint response: {0}")]
    Decode(String),
}

impl BackendError {
    /// Connection failures, rate limiting and server errors are retried.
    pub fn is_retryable(&self) -> bool {
        match self {
            BackendError::Transport(_) => true,
            BackendError::Status { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }

    pub fn is_transport(&self) -> bool {
        self.is_retryable()
    }
}

/// Final failure of one scoring request.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{cause} (after {attempts} attempt(s))")]
pub struct ScoreError {
    pub attempts: u32,
    pub cause: BackendError,
}

/// Everything a backend may need to answer one request.
#[derive(Debug, Clone, Copy)]
pub struct ChatRequest<'a> {
    pub article: &'a Article,
    pub prompt: &'a PromptPair,
    pub rep_index: u32,
}

/// A chat-completion service. Each call is an independent session: no
/// conversation state is carried between calls.
pub trait ChatBackend: Send + Sync {
    fn model_id(&self) -> &str;
    fn complete(&self, request: &ChatRequest<'_>) -> Result<String, BackendError>;

    /// Creation time stamped on successful reports.
    fn timestamp(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Issue one fresh-session request, retrying transient failures up to
/// `cfg.retry_limit` times.
pub fn score_article(
    backend: &dyn ChatBackend,
    article: &Article,
    prompt: &PromptPair,
    cfg: &ModelConfig,
    rep_index: u32,
) -> Result<RawReport, ScoreError> {
    assert!(
        rep_index < cfg.repetitions,
        "rep_index {rep_index} >= repetitions {}",
        cfg.repetitions
    );
    let request = ChatRequest {
        article,
        prompt,
        rep_index,
    };
    let mut attempts = 0;
    loop {
        attempts += 1;
        let outcome = backend
            .complete(&request)
            .and_then(|text| {
                if text.trim().is_empty() {
                    Err(BackendError::EmptyResponse)
                } else {
                    Ok(text)
                }
            });
        match outcome {
            Ok(text) => {
                return Ok(RawReport {
                    article_id: article.id.clone(),
                    rep_index,
                    model_id: backend.model_id().to_string(),
                    text,
                    created_at: backend.timestamp(),
                    attempt_count: attempts,
                })
            }
            Err(cause) if cause.is_retryable() && attempts <= cfg.retry_limit => {
                std::thread::sleep(cfg.backoff(attempts));
            }
            Err(cause) => return Err(ScoreError { attempts, cause }),
        }
    }
}
