use std::time::Duration;

use async_trait::async_trait;
use reqwest::header::{HeaderMap, RETRY_AFTER};
use reqwest::Client;
use serde::Deserialize;

use super::{ApiKey, AttemptError, ChatBackend, ChatRequest, GatewayError, ProviderSettings};

/// Chat-completion endpoint over HTTP with bearer auth.
pub struct HttpBackend {
    client: Client,
    url: String,
    api_key: ApiKey,
}

#[derive(Deserialize)]
struct CompletionBody {
    #[serde(default)]
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    #[serde(default)]
    content: Option<String>,
}

fn retry_after(headers: &HeaderMap) -> Option<Duration> {
    headers
        .get(RETRY_AFTER)?
        .to_str()
        .ok()?
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|secs| secs.is_finite() && *secs >= 0.0)
        .map(Duration::from_secs_f64)
}

impl HttpBackend {
    pub fn new(settings: &ProviderSettings) -> Result<Self, GatewayError> {
        let client = Client::builder()
            .timeout(settings.request_timeout)
            .build()
            .map_err(|e| GatewayError::ProviderUnavailable {
                attempts: 0,
                last_error: format!("failed to build HTTP client: {e}"),
            })?;
        Ok(Self {
            client,
            url: format!(
                "{}/chat/completions",
                settings.base_url.trim_end_matches('/')
            ),
            api_key: settings.api_key.clone(),
        })
    }
}

#[async_trait]
impl ChatBackend for HttpBackend {
    async fn send(&self, request: &ChatRequest) -> Result<String, AttemptError> {
        tracing::debug!(url = %self.url, model = %request.model, messages = request.messages.len(), "POST chat completion");
        let response = self
            .client
            .post(&self.url)
            .bearer_auth(self.api_key.expose())
            .json(request)
            .send()
            .await
            .map_err(|e| AttemptError::Transport(e.without_url().to_string()))?;

        let status = response.status();
        if !status.is_success() {
            let retry_after = retry_after(response.headers());
            let body = response.text().await.unwrap_or_default();
            return Err(AttemptError::Status {
                status: status.as_u16(),
                retry_after,
                body,
            });
        }
        let body: CompletionBody = response.json().await.map_err(|e| {
            AttemptError::Transport(format!("malformed response: {}", e.without_url()))
        })?;
        Ok(body
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .unwrap_or_default())
    }
}
