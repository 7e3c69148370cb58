//! Runtime settings for `serve`: command-line flags, then environment, then
//! an optional TOML file, then defaults.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;
use tutor_core::gateway::mock::{MockProvider, ScriptedOutcome};
use tutor_core::gateway::{
    ApiKey, RetryPolicy, DEFAULT_BASE_URL, ENV_API_KEY, ENV_BASE_URL, ENV_MODEL,
};
use tutor_core::{Gateway, ProviderSettings};

pub const ENV_DB: &str = "LLTEACHER_DB";
pub const DEFAULT_DB: &str = "tutor.db";
pub const DEFAULT_LISTEN: &str = "127.0.0.1:8080";

/// Canned replies for `--mock-provider`, served in a loop.
pub const MOCK_REPLIES: [&str; 3] = [
    "What have you tried so far, and what did you get?",
    "Good start. Which step of your reasoning would you check first, and why?",
    "Can you explain that last step in your own words?",
];

#[derive(Debug, Error)]
pub enum SettingsError {
    #[error("environment variable {0} is required for the live provider but is not set")]
    MissingEnv(&'static str),
    #[error("cannot read config file {path}: {message}")]
    Read { path: PathBuf, message: String },
    #[error("invalid config file: {0}")]
    Parse(String),
    #[error("invalid setting: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    #[default]
    Live,
    Mock,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderFile {
    pub kind: Option<ProviderKind>,
    pub base_url: Option<String>,
    pub request_timeout_secs: Option<u64>,
    pub max_retries: Option<u32>,
    pub backoff_base_ms: Option<u64>,
}

/// Shape of the `--config` TOML file. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub db: Option<PathBuf>,
    pub listen: Option<String>,
    pub token_ttl_minutes: Option<i64>,
    #[serde(default)]
    pub provider: ProviderFile,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, SettingsError> {
        let text = std::fs::read_to_string(path).map_err(|e| SettingsError::Read {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        // The error's Display quotes the offending source line, which could
        // be a misplaced secret; report position and message only.
        toml::from_str(&text).map_err(|e| {
            let line = e
                .span()
                .map(|span| text[..span.start].matches('\n').count() + 1)
                .unwrap_or(0);
            SettingsError::Parse(format!("line {line}: {}", e.message()))
        })
    }
}

/// Values given on the command line (or via `LLTEACHER_DB`, which clap folds
/// into `db`).
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub db: Option<PathBuf>,
    pub listen: Option<String>,
    pub mock_provider: bool,
}

#[derive(Debug, Clone)]
pub enum ProviderChoice {
    Live(ProviderSettings),
    Mock,
}

#[derive(Debug, Clone)]
pub struct ServeSettings {
    pub db: PathBuf,
    pub listen: String,
    pub token_ttl: chrono::Duration,
    pub provider: ProviderChoice,
    /// Model for a fresh database; a stored config always wins.
    pub initial_model: Option<String>,
}

pub fn resolve(
    overrides: Overrides,
    file: FileConfig,
    env: impl Fn(&str) -> Option<String>,
) -> Result<ServeSettings, SettingsError> {
    let env = |name: &str| env(name).filter(|v| !v.trim().is_empty());
    let kind = if overrides.mock_provider {
        ProviderKind::Mock
    } else {
        file.provider.kind.unwrap_or_default()
    };
    let provider = match kind {
        ProviderKind::Mock => ProviderChoice::Mock,
        ProviderKind::Live => {
            let key = env(ENV_API_KEY).ok_or(SettingsError::MissingEnv(ENV_API_KEY))?;
            let base_url = env(ENV_BASE_URL)
                .or(file.provider.base_url)
                .unwrap_or_else(|| DEFAULT_BASE_URL.to_owned());
            let mut settings = ProviderSettings::new(base_url, ApiKey::new(key));
            if let Some(secs) = file.provider.request_timeout_secs {
                settings.request_timeout = Duration::from_secs(secs);
            }
            if let Some(n) = file.provider.max_retries {
                settings.max_retries = n;
            }
            if let Some(ms) = file.provider.backoff_base_ms {
                settings.backoff_base = Duration::from_millis(ms);
            }
            ProviderChoice::Live(settings)
        }
    };
    let token_ttl = match file.token_ttl_minutes {
        Some(m) if m <= 0 => {
            return Err(SettingsError::Invalid(
                "token_ttl_minutes must be positive".into(),
            ))
        }
        Some(m) => chrono::Duration::minutes(m),
        None => crate::state::DEFAULT_TOKEN_TTL,
    };
    Ok(ServeSettings {
        db: overrides
            .db
            .or(file.db)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_DB)),
        listen: overrides
            .listen
            .or(file.listen)
            .unwrap_or_else(|| DEFAULT_LISTEN.to_owned()),
        token_ttl,
        provider,
        initial_model: env(ENV_MODEL),
    })
}

pub fn build_gateway(choice: &ProviderChoice) -> Result<Gateway, SettingsError> {
    match choice {
        ProviderChoice::Live(settings) => {
            Gateway::http(settings).map_err(|e| SettingsError::Invalid(e.to_string()))
        }
        ProviderChoice::Mock => {
            let script = MOCK_REPLIES
                .iter()
                .map(|r| ScriptedOutcome::reply(*r))
                .collect();
            let mock = MockProvider::new(script)
                .expect("script is nonempty")
                .looping();
            Ok(Gateway::new(
                Arc::new(mock),
                RetryPolicy {
                    max_retries: 0,
                    backoff_base: Duration::ZERO,
                },
            ))
        }
    }
}
