//! Scripted provider for tests and offline demos.

use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::Duration;

use async_trait::async_trait;

use super::{AttemptError, ChatBackend, ChatRequest, GatewayError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScriptedOutcome {
    Reply(String),
    /// HTTP error status without a retry hint.
    Status(u16),
    RateLimited {
        retry_after: Option<Duration>,
    },
    Transport(String),
    /// Success with empty content.
    Empty,
}

impl ScriptedOutcome {
    pub fn reply(text: impl Into<String>) -> Self {
        ScriptedOutcome::Reply(text.into())
    }
}

/// Replays outcomes in order and records every request it receives.
/// Consumption is serialized, so concurrent callers each take exactly one
/// outcome.
#[derive(Debug)]
pub struct MockProvider {
    script: Mutex<VecDeque<ScriptedOutcome>>,
    original: Vec<ScriptedOutcome>,
    looping: bool,
    latency: Duration,
    requests: Mutex<Vec<ChatRequest>>,
}

impl MockProvider {
    pub fn new(script: Vec<ScriptedOutcome>) -> Result<Self, GatewayError> {
        if script.is_empty() {
            return Err(GatewayError::ScriptExhausted);
        }
        Ok(Self {
            script: Mutex::new(script.iter().cloned().collect()),
            original: script,
            looping: false,
            latency: Duration::ZERO,
            requests: Mutex::new(Vec::new()),
        })
    }

    /// Restarts the script from the top instead of running dry.
    pub fn looping(mut self) -> Self {
        self.looping = true;
        self
    }

    /// Delay applied to every call after the request is recorded.
    pub fn with_latency(mut self, latency: Duration) -> Self {
        self.latency = latency;
        self
    }

    pub fn requests(&self) -> Vec<ChatRequest> {
        self.requests.lock().unwrap().clone()
    }

    pub fn remaining(&self) -> usize {
        self.script.lock().unwrap().len()
    }

    fn next_outcome(&self) -> Option<ScriptedOutcome> {
        let mut script = self.script.lock().unwrap();
        if script.is_empty() && self.looping {
            script.extend(self.original.iter().cloned());
        }
        script.pop_front()
    }
}

#[async_trait]
impl ChatBackend for MockProvider {
    async fn send(&self, request: &ChatRequest) -> Result<String, AttemptError> {
        self.requests.lock().unwrap().push(request.clone());
        let outcome = self.next_outcome();
        if !self.latency.is_zero() {
            tokio::time::sleep(self.latency).await;
        }
        match outcome {
            None => Err(AttemptError::ScriptExhausted),
            Some(ScriptedOutcome::Reply(text)) => Ok(text),
            Some(ScriptedOutcome::Empty) => Ok(String::new()),
            Some(ScriptedOutcome::Status(status)) => Err(AttemptError::Status {
                status,
                retry_after: None,
                body: String::new(),
            }),
            Some(ScriptedOutcome::RateLimited { retry_after }) => Err(AttemptError::Status {
                status: 429,
                retry_after,
                body: String::new(),
            }),
            Some(ScriptedOutcome::Transport(msg)) => Err(AttemptError::Transport(msg)),
        }
    }
}

/// Error-redirection exchange: a student uses the normal approximation for
/// a 95% confidence interval on a proportion with only 20 observations,
/// after the course taught the bootstrap.
pub mod fixtures {
    use super::{MockProvider, ScriptedOutcome};

    pub const Z_APPROX_STUDENT_MESSAGE: &str = "For the 95% confidence interval on the proportion with n = 20 I used the z approximation: p_hat +/- 1.96 * sqrt(p_hat * (1 - p_hat) / 20).";

    pub const Z_APPROX_TUTOR_REPLY: &str = "You are using an approximation which is, under certain assumptions, acceptable, but check well. Do the assumptions here hold?";

    pub fn z_approximation_provider() -> MockProvider {
        MockProvider::new(vec![ScriptedOutcome::reply(Z_APPROX_TUTOR_REPLY)])
            .expect("fixture script is nonempty")
    }
}
