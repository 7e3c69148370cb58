//! System-prompt assembly and the solution-leak guard.
//!
//! The assembled system prompt always has the same six sections in the same
//! order: base prompt, never-reveal directive, mode directive, problem
//! statement, delimited instructor solution, error-redirection directive.
//! The exact text is pinned by golden files under `tests/golden/` and
//! documented in `docs/prompt-template.md`.

mod guard;
mod template;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Author, Homework, Message};

pub use guard::{
    guard_reply, guard_retry, scan_reply, tokenize, GuardReport, LeakRun, Token, REDACTION_NOTICE,
    WITHHELD_MARKER,
};
pub use template::{
    render_mode_directive, DEFAULT_BASE_PROMPT, ERROR_REDIRECTION_DIRECTIVE,
    NEVER_REVEAL_DIRECTIVE, PROBLEM_CLOSE, PROBLEM_OPEN, SOLUTION_CLOSE, SOLUTION_OPEN,
};

pub const DEFAULT_MODEL_ID: &str = "gpt-4o-mini";
pub const DEFAULT_GUARD_MIN_RUN: u32 = 12;
pub const MIN_GUARD_MIN_RUN: u32 = 4;
pub const DEFAULT_TEMPERATURE: f64 = 0.2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PromptError {
    #[error("homework field `{0}` is empty")]
    EmptyField(&'static str),
    #[error("history is not in strictly increasing seq order")]
    MalformedHistory,
    #[error("invalid tutor config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuardPolicy {
    RegenerateThenRedact,
    RedactOnly,
}

impl GuardPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            GuardPolicy::RegenerateThenRedact => "regenerate_then_redact",
            GuardPolicy::RedactOnly => "redact_only",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "regenerate_then_redact" => Some(GuardPolicy::RegenerateThenRedact),
            "redact_only" => Some(GuardPolicy::RedactOnly),
            _ => None,
        }
    }
}

/// Service-wide tutor settings, editable by instructors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TutorConfig {
    pub model_id: String,
    pub base_prompt: String,
    /// Shortest verbatim token run that counts as a leak.
    pub guard_min_run: u32,
    pub guard_policy: GuardPolicy,
    /// Student turns allowed per session; unlimited when absent.
    pub max_turns: Option<u32>,
    pub temperature: f64,
}

impl Default for TutorConfig {
    fn default() -> Self {
        Self {
            model_id: DEFAULT_MODEL_ID.to_owned(),
            base_prompt: DEFAULT_BASE_PROMPT.to_owned(),
            guard_min_run: DEFAULT_GUARD_MIN_RUN,
            guard_policy: GuardPolicy::RegenerateThenRedact,
            max_turns: None,
            temperature: DEFAULT_TEMPERATURE,
        }
    }
}

impl TutorConfig {
    pub fn validate(&self) -> Result<(), PromptError> {
        if self.model_id.trim().is_empty() {
            return Err(PromptError::InvalidConfig(
                "model_id must not be empty".into(),
            ));
        }
        if self.base_prompt.trim().is_empty() {
            return Err(PromptError::InvalidConfig(
                "base_prompt must not be empty".into(),
            ));
        }
        if self.guard_min_run < MIN_GUARD_MIN_RUN {
            return Err(PromptError::InvalidConfig(format!(
                "guard_min_run must be at least {MIN_GUARD_MIN_RUN}"
            )));
        }
        if self.max_turns == Some(0) {
            return Err(PromptError::InvalidConfig(
                "max_turns must be positive".into(),
            ));
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(PromptError::InvalidConfig(
                "temperature must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistoryRole {
    Student,
    Tutor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub role: HistoryRole,
    pub content: String,
}

/// Everything the provider needs for one completion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub system_prompt: String,
    pub history: Vec<HistoryEntry>,
    pub model_id: String,
    pub temperature: f64,
}

/// Builds the system prompt and provider history for a tutoring turn.
/// Pure: identical inputs give a byte-identical bundle. System notices are
/// left out of the history; all other message contents pass through
/// unmodified.
pub fn assemble_prompt(
    config: &TutorConfig,
    homework: &Homework,
    history: &[Message],
) -> Result<PromptBundle, PromptError> {
    if homework.problem_statement.trim().is_empty() {
        return Err(PromptError::EmptyField("problem_statement"));
    }
    if homework.solution.trim().is_empty() {
        return Err(PromptError::EmptyField("solution"));
    }
    if history.windows(2).any(|w| w[0].seq >= w[1].seq) {
        return Err(PromptError::MalformedHistory);
    }

    let system_prompt = template::render_system_prompt(
        &config.base_prompt,
        homework.mode,
        &homework.problem_statement,
        &homework.solution,
    );
    let history = history
        .iter()
        .filter_map(|m| {
            let role = match m.author {
                Author::Student => HistoryRole::Student,
                Author::Tutor => HistoryRole::Tutor,
                Author::SystemNotice => return None,
            };
            Some(HistoryEntry {
                role,
                content: m.content.clone(),
            })
        })
        .collect();

    Ok(PromptBundle {
        system_prompt,
        history,
        model_id: config.model_id.clone(),
        temperature: config.temperature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{GuardAction, Mode};
    use chrono::Utc;

    fn homework(mode: Mode) -> Homework {
        Homework {
            id: "hw".into(),
            title: "T".into(),
            problem_statement: "State the problem.".into(),
            solution: "Secret worked answer.".into(),
            mode,
            created_by: "i".into(),
            created_at: Utc::now(),
            due_at: None,
        }
    }

    #[test]
    fn sections_appear_in_fixed_order() {
        let config = TutorConfig::default();
        let bundle = assemble_prompt(&config, &homework(Mode::Recall), &[]).unwrap();
        let p = &bundle.system_prompt;
        let positions = [
            p.find(DEFAULT_BASE_PROMPT).unwrap(),
            p.find(NEVER_REVEAL_DIRECTIVE).unwrap(),
            p.find(render_mode_directive(Mode::Recall)).unwrap(),
            p.find("State the problem.").unwrap(),
            p.find(SOLUTION_OPEN).unwrap(),
            p.find("Secret worked answer.").unwrap(),
            p.find(SOLUTION_CLOSE).unwrap(),
            p.find(ERROR_REDIRECTION_DIRECTIVE).unwrap(),
        ];
        assert!(positions.windows(2).all(|w| w[0] < w[1]), "{positions:?}");
    }

    #[test]
    fn history_skips_notices_and_keeps_content() {
        let now = Utc::now();
        let history = vec![
            Message::student(1, "```r\nx <- 1\n```", now),
            Message::notice(2, "tutor unavailable, please retry", now),
            Message::student(3, "again", now),
            Message::tutor(4, "Why?", GuardAction::None, now),
        ];
        let bundle = assemble_prompt(
            &TutorConfig::default(),
            &homework(Mode::Discovery),
            &history,
        )
        .unwrap();
        let got: Vec<_> = bundle
            .history
            .iter()
            .map(|h| (h.role, h.content.as_str()))
            .collect();
        assert_eq!(
            got,
            vec![
                (HistoryRole::Student, "```r\nx <- 1\n```"),
                (HistoryRole::Student, "again"),
                (HistoryRole::Tutor, "Why?"),
            ]
        );
    }

    #[test]
    fn empty_solution_is_rejected() {
        let mut hw = homework(Mode::Recall);
        hw.solution = "  ".into();
        assert_eq!(
            assemble_prompt(&TutorConfig::default(), &hw, &[]),
            Err(PromptError::EmptyField("solution"))
        );
        hw.solution = "s".into();
        hw.problem_statement.clear();
        assert_eq!(
            assemble_prompt(&TutorConfig::default(), &hw, &[]),
            Err(PromptError::EmptyField("problem_statement"))
        );
    }

    #[test]
    fn out_of_order_history_is_rejected() {
        let now = Utc::now();
        let history = [Message::student(2, "b", now), Message::student(1, "a", now)];
        assert_eq!(
            assemble_prompt(&TutorConfig::default(), &homework(Mode::Recall), &history),
            Err(PromptError::MalformedHistory)
        );
    }

    #[test]
    fn config_validation() {
        assert!(TutorConfig::default().validate().is_ok());
        let bad = [
            TutorConfig {
                guard_min_run: 3,
                ..Default::default()
            },
            TutorConfig {
                base_prompt: " ".into(),
                ..Default::default()
            },
            TutorConfig {
                temperature: -0.1,
                ..Default::default()
            },
            TutorConfig {
                max_turns: Some(0),
                ..Default::default()
            },
        ];
        for config in bad {
            assert!(config.validate().is_err(), "{config:?}");
        }
    }

    #[test]
    fn mode_directive_is_pure() {
        for mode in Mode::ALL {
            assert_eq!(render_mode_directive(mode), render_mode_directive(mode));
        }
        assert_ne!(
            render_mode_directive(Mode::Recall),
            render_mode_directive(Mode::Discovery)
        );
    }
}
