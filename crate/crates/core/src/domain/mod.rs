//! Persistent domain types and the pure rules that govern them.

mod authz;
mod lifecycle;
mod submissions;

use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use uuid::Uuid;

pub use authz::{authorize, Action, Decision, Resource};
pub use lifecycle::{transition, SessionEvent};
pub use submissions::{derive_submission_rows, SubmissionRow, SubmissionStatus};

macro_rules! opaque_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            /// Fresh server-side identifier.
            pub fn generate() -> Self {
                Self(Uuid::new_v4().to_string())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl From<String> for $name {
            fn from(value: String) -> Self {
                Self(value)
            }
        }

        impl From<&str> for $name {
            fn from(value: &str) -> Self {
                Self(value.to_owned())
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

opaque_id!(
    /// Identifier of a [`User`].
    UserId
);
opaque_id!(
    /// Identifier of a [`Homework`].
    HomeworkId
);
opaque_id!(
    /// Identifier of a [`Session`].
    SessionId
);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("illegal transition: {event} is not allowed while the session is {from}")]
    IllegalTransition {
        from: SessionStatus,
        event: &'static str,
    },
    #[error("unauthorized: {0}")]
    Unauthorized(&'static str),
    #[error("inconsistent input: {0}")]
    InconsistentInput(String),
    #[error("validation failed: {0}")]
    Validation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Instructor,
    Student,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Instructor => "instructor",
            Role::Student => "student",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "instructor" => Some(Role::Instructor),
            "student" => Some(Role::Student),
            _ => None,
        }
    }
}

/// An account. `username` is the login handle and is unique; `display_name`
/// is what instructors see in tables and may collide between users.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct User {
    pub id: UserId,
    pub username: String,
    pub display_name: String,
    pub role: Role,
    pub credential_hash: Vec<u8>,
}

impl User {
    pub fn is_instructor(&self) -> bool {
        self.role == Role::Instructor
    }
}

/// Pedagogical mode of an assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Practice of material already taught in class.
    Recall,
    /// Guided inquiry toward a concept not yet taught.
    Discovery,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Recall, Mode::Discovery];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Recall => "recall",
            Mode::Discovery => "discovery",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "recall" => Some(Mode::Recall),
            "discovery" => Some(Mode::Discovery),
            _ => None,
        }
    }
}

/// An assignment. The `solution` is instructor-only: it feeds the prompt
/// engine and the leak guard and must never reach a student payload.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Homework {
    pub id: HomeworkId,
    pub title: String,
    pub problem_statement: String,
    pub solution: String,
    pub mode: Mode,
    pub created_by: UserId,
    pub created_at: DateTime<Utc>,
    pub due_at: Option<DateTime<Utc>>,
}

impl Homework {
    /// Checks the nonempty-field rules.
    pub fn validate(&self) -> Result<(), DomainError> {
        for (name, value) in [
            ("title", &self.title),
            ("problem_statement", &self.problem_statement),
            ("solution", &self.solution),
        ] {
            if value.trim().is_empty() {
                return Err(DomainError::Validation(format!("{name} must not be empty")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    InProgress,
    Submitted,
    Graded,
}

impl SessionStatus {
    pub const ALL: [SessionStatus; 3] = [
        SessionStatus::InProgress,
        SessionStatus::Submitted,
        SessionStatus::Graded,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SessionStatus::InProgress => "in_progress",
            SessionStatus::Submitted => "submitted",
            SessionStatus::Graded => "graded",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "in_progress" => Some(SessionStatus::InProgress),
            "submitted" => Some(SessionStatus::Submitted),
            "graded" => Some(SessionStatus::Graded),
            _ => None,
        }
    }
}

impl fmt::Display for SessionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Author {
    Student,
    Tutor,
    /// Recorded by the service itself: guard interventions, provider
    /// failures and lifecycle events.
    SystemNotice,
}

impl Author {
    pub fn as_str(self) -> &'static str {
        match self {
            Author::Student => "student",
            Author::Tutor => "tutor",
            Author::SystemNotice => "system_notice",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "student" => Some(Author::Student),
            "tutor" => Some(Author::Tutor),
            "system_notice" => Some(Author::SystemNotice),
            _ => None,
        }
    }
}

/// What the leak guard did to a tutor reply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuardAction {
    None,
    Regenerated,
    Redacted,
}

impl GuardAction {
    pub fn as_str(self) -> &'static str {
        match self {
            GuardAction::None => "none",
            GuardAction::Regenerated => "regenerated",
            GuardAction::Redacted => "redacted",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(GuardAction::None),
            "regenerated" => Some(GuardAction::Regenerated),
            "redacted" => Some(GuardAction::Redacted),
            _ => None,
        }
    }
}

/// One transcript entry. Content may contain fenced code blocks and is kept
/// byte-for-byte.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub seq: u32,
    pub author: Author,
    pub content: String,
    pub created_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard_action: Option<GuardAction>,
}

impl Message {
    pub fn student(seq: u32, content: impl Into<String>, at: DateTime<Utc>) -> Self {
        Self {
            seq,
            author: Author::Student,
            content: content.into(),
            created_at: at,
            guard_action: None,
        }
    }

    pub fn tutor(
        seq: u32,
        content: impl Into<String>,
        action: GuardAction,
        at: DateTime<Utc>,
    ) -> Self {
        Self {
            seq,
            author: Author::Tutor,
            content: content.into(),
            created_at: at,
            guard_action: Some(action),
        }
    }

    pub fn notice(seq: u32, content: impl Into<String>, at: DateTime<Utc>) -> Self {
        Self {
            seq,
            author: Author::SystemNotice,
            content: content.into(),
            created_at: at,
            guard_action: None,
        }
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if self.seq == 0 {
            return Err(DomainError::Validation("seq starts at 1".into()));
        }
        match self.author {
            Author::Student | Author::Tutor if self.content.trim().is_empty() => Err(
                DomainError::Validation(format!("{} message is empty", self.author.as_str())),
            ),
            Author::Student | Author::SystemNotice if self.guard_action.is_some() => Err(
                DomainError::Validation("guard_action is only valid on tutor messages".into()),
            ),
            _ => Ok(()),
        }
    }
}

/// Instructor grade on a 0 to 100 scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grade {
    pub score: f64,
    pub feedback: String,
    pub graded_by: UserId,
    pub graded_at: DateTime<Utc>,
}

impl Grade {
    pub fn validate(&self) -> Result<(), DomainError> {
        if !self.score.is_finite() || !(0.0..=100.0).contains(&self.score) {
            return Err(DomainError::Validation(format!(
                "score {} is outside [0, 100]",
                self.score
            )));
        }
        Ok(())
    }
}

/// One student's attempt at one homework.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: SessionId,
    pub homework_id: HomeworkId,
    pub student_id: UserId,
    pub status: SessionStatus,
    pub messages: Vec<Message>,
    pub started_at: DateTime<Utc>,
    pub submitted_at: Option<DateTime<Utc>>,
    pub grade: Option<Grade>,
}

impl Session {
    pub fn start(homework_id: HomeworkId, student_id: UserId, at: DateTime<Utc>) -> Self {
        Self {
            id: SessionId::generate(),
            homework_id,
            student_id,
            status: SessionStatus::InProgress,
            messages: Vec::new(),
            started_at: at,
            submitted_at: None,
            grade: None,
        }
    }

    pub fn last_seq(&self) -> u32 {
        self.messages.last().map_or(0, |m| m.seq)
    }

    pub fn student_turns(&self) -> usize {
        self.messages
            .iter()
            .filter(|m| m.author == Author::Student)
            .count()
    }

    /// Most recent timestamp touching this session.
    pub fn last_activity_at(&self) -> DateTime<Utc> {
        let mut latest = self.started_at;
        let candidates = self
            .messages
            .last()
            .map(|m| m.created_at)
            .into_iter()
            .chain(self.submitted_at)
            .chain(self.grade.as_ref().map(|g| g.graded_at));
        for at in candidates {
            latest = latest.max(at);
        }
        latest
    }

    /// Checks that `turn` continues this transcript: gap-free sequence
    /// numbers starting at `last_seq() + 1`, each message individually valid.
    pub fn check_continuation(&self, turn: &[Message]) -> Result<(), DomainError> {
        for (expected, message) in (self.last_seq() + 1..).zip(turn) {
            message.validate()?;
            if message.seq != expected {
                return Err(DomainError::InconsistentInput(format!(
                    "expected seq {expected}, got {}",
                    message.seq
                )));
            }
        }
        Ok(())
    }

    /// Status-dependent field invariants.
    pub fn check_invariants(&self) -> Result<(), DomainError> {
        let submitted = matches!(
            self.status,
            SessionStatus::Submitted | SessionStatus::Graded
        );
        if submitted != self.submitted_at.is_some() {
            return Err(DomainError::InconsistentInput(
                "submitted_at must be set exactly when submitted or graded".into(),
            ));
        }
        if (self.status == SessionStatus::Graded) != self.grade.is_some() {
            return Err(DomainError::InconsistentInput(
                "grade must be set exactly when graded".into(),
            ));
        }
        for (index, message) in self.messages.iter().enumerate() {
            if message.seq as usize != index + 1 {
                return Err(DomainError::InconsistentInput(format!(
                    "message {index} has seq {}",
                    message.seq
                )));
            }
        }
        Ok(())
    }
}
