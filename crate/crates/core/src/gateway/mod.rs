//! Provider-abstracted chat-completion client.
//!
//! A [`ChatBackend`] performs exactly one attempt; [`Gateway`] owns the retry
//! policy on top of it. Retryable failures are transport errors, HTTP 5xx
//! and 429. The delay before retry `n` (0-based) is drawn uniformly from
//! `[0, backoff_base * 2^n]`, unless a 429 carries a retry-after hint, which
//! is used as-is.

mod http;
pub mod mock;

use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use async_trait::async_trait;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompt::{HistoryRole, PromptBundle};

pub use http::HttpBackend;
pub use mock::{MockProvider, ScriptedOutcome};

pub const ENV_API_KEY: &str = "LLTEACHER_API_KEY";
pub const ENV_BASE_URL: &str = "LLTEACHER_BASE_URL";
pub const ENV_MODEL: &str = "LLTEACHER_MODEL";

pub const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";
pub const DEFAULT_REQUEST_TIMEOUT: Duration = Duration::from_secs(60);
pub const DEFAULT_MAX_RETRIES: u32 = 2;
pub const DEFAULT_BACKOFF_BASE: Duration = Duration::from_millis(500);

/// Provider credential. Never printed: `Debug` and `Display` are masked.
#[derive(Clone, PartialEq, Eq)]
pub struct ApiKey(String);

impl ApiKey {
    pub fn new(key: impl Into<String>) -> Self {
        Self(key.into())
    }

    pub fn expose(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for ApiKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ApiKey(***)")
    }
}

impl fmt::Display for ApiKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("***")
    }
}

#[derive(Debug, Clone)]
pub struct ProviderSettings {
    pub base_url: String,
    pub api_key: ApiKey,
    pub request_timeout: Duration,
    pub max_retries: u32,
    pub backoff_base: Duration,
}

impl ProviderSettings {
    pub fn new(base_url: impl Into<String>, api_key: ApiKey) -> Self {
        Self {
            base_url: base_url.into(),
            api_key,
            request_timeout: DEFAULT_REQUEST_TIMEOUT,
            max_retries: DEFAULT_MAX_RETRIES,
            backoff_base: DEFAULT_BACKOFF_BASE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletionResult {
    pub content: String,
    pub provider_latency: Duration,
    pub attempt_count: u32,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GatewayError {
    #[error("provider unavailable after {attempts} attempts: {last_error}")]
    ProviderUnavailable { attempts: u32, last_error: String },
    #[error("provider rejected the request with HTTP {status}")]
    ProviderRejected { status: u16, body: String },
    #[error("provider returned an empty completion")]
    EmptyCompletion,
    #[error("mock provider script exhausted")]
    ScriptExhausted,
}

/// Failure of a single attempt.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AttemptError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("HTTP {status}")]
    Status {
        status: u16,
        retry_after: Option<Duration>,
        body: String,
    },
    #[error("script exhausted")]
    ScriptExhausted,
}

impl AttemptError {
    fn is_retryable(&self) -> bool {
        match self {
            AttemptError::Transport(_) => true,
            AttemptError::Status { status, .. } => *status == 429 || (500..600).contains(status),
            AttemptError::ScriptExhausted => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireMessage {
    pub role: String,
    pub content: String,
}

/// Body of `POST {base_url}/chat/completions`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub temperature: f64,
    pub messages: Vec<WireMessage>,
}

impl From<&PromptBundle> for ChatRequest {
    fn from(bundle: &PromptBundle) -> Self {
        let mut messages = Vec::with_capacity(bundle.history.len() + 1);
        messages.push(WireMessage {
            role: "system".into(),
            content: bundle.system_prompt.clone(),
        });
        messages.extend(bundle.history.iter().map(|entry| {
            WireMessage {
                role: match entry.role {
                    HistoryRole::Student => "user",
                    HistoryRole::Tutor => "assistant",
                }
                .into(),
                content: entry.content.clone(),
            }
        }));
        Self {
            model: bundle.model_id.clone(),
            temperature: bundle.temperature,
            messages,
        }
    }
}

#[async_trait]
pub trait ChatBackend: Send + Sync {
    /// One attempt. Returns the first choice's content, possibly empty.
    async fn send(&self, request: &ChatRequest) -> Result<String, AttemptError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub backoff_base: Duration,
}

impl From<&ProviderSettings> for RetryPolicy {
    fn from(settings: &ProviderSettings) -> Self {
        Self {
            max_retries: settings.max_retries,
            backoff_base: settings.backoff_base,
        }
    }
}

impl RetryPolicy {
    fn delay(&self, retry: u32, hint: Option<Duration>) -> Duration {
        if let Some(hint) = hint {
            return hint;
        }
        let cap = self
            .backoff_base
            .saturating_mul(2u32.saturating_pow(retry.min(16)));
        if cap.is_zero() {
            return Duration::ZERO;
        }
        let nanos = rand::thread_rng().gen_range(0..=cap.as_nanos().min(u64::MAX as u128) as u64);
        Duration::from_nanos(nanos)
    }
}

#[derive(Clone)]
pub struct Gateway {
    backend: Arc<dyn ChatBackend>,
    policy: RetryPolicy,
}

impl fmt::Debug for Gateway {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gateway")
            .field("policy", &self.policy)
            .finish()
    }
}

impl Gateway {
    pub fn new(backend: Arc<dyn ChatBackend>, policy: RetryPolicy) -> Self {
        Self { backend, policy }
    }

    /// Gateway talking HTTP to a chat-completion endpoint.
    pub fn http(settings: &ProviderSettings) -> Result<Self, GatewayError> {
        let backend = HttpBackend::new(settings)?;
        Ok(Self::new(Arc::new(backend), settings.into()))
    }

    pub fn policy(&self) -> RetryPolicy {
        self.policy
    }

    /// Sends the bundle and returns the first nonempty reply. Makes at most
    /// `1 + max_retries` attempts.
    pub async fn complete(&self, bundle: &PromptBundle) -> Result<CompletionResult, GatewayError> {
        let request = ChatRequest::from(bundle);
        let started = Instant::now();
        let mut attempt: u32 = 0;
        loop {
            attempt += 1;
            match self.backend.send(&request).await {
                Ok(content) if content.trim().is_empty() => {
                    tracing::warn!(attempt, "provider returned empty content");
                    return Err(GatewayError::EmptyCompletion);
                }
                Ok(content) => {
                    tracing::debug!(attempt, "completion received");
                    return Ok(CompletionResult {
                        content,
                        provider_latency: started.elapsed(),
                        attempt_count: attempt,
                    });
                }
                Err(AttemptError::ScriptExhausted) => return Err(GatewayError::ScriptExhausted),
                Err(err) if !err.is_retryable() => {
                    let AttemptError::Status { status, body, .. } = err else {
                        unreachable!("only status errors are non-retryable here");
                    };
                    tracing::warn!(attempt, status, "provider rejected request");
                    return Err(GatewayError::ProviderRejected { status, body });
                }
                Err(err) => {
                    if attempt > self.policy.max_retries {
                        tracing::warn!(attempt, error = %err, "provider retries exhausted");
                        return Err(GatewayError::ProviderUnavailable {
                            attempts: attempt,
                            last_error: err.to_string(),
                        });
                    }
                    let hint = match &err {
                        AttemptError::Status { retry_after, .. } => *retry_after,
                        _ => None,
                    };
                    let delay = self.policy.delay(attempt - 1, hint);
                    tracing::info!(attempt, error = %err, delay_ms = delay.as_millis() as u64, "retrying provider call");
                    tokio::time::sleep(delay).await;
                }
            }
        }
    }
}
