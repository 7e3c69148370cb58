//! Response bodies. Student-facing views are built from the same types with
//! the solution and guard annotations stripped at construction time.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use tutor_core::{
    Author, Grade, GuardAction, Homework, HomeworkId, Message, Mode, Role, Session, SessionId,
    SessionStatus, User, UserId,
};

/// Whose eyes a view is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Audience {
    Instructor,
    Student,
}

impl From<&User> for Audience {
    fn from(user: &User) -> Self {
        match user.role {
            Role::Instructor => Audience::Instructor,
            Role::Student => Audience::Student,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserView {
    pub id: UserId,
    pub username: String,
    pub display_name: String,
    pub role: Role,
}

impl From<&User> for UserView {
    fn from(u: &User) -> Self {
        Self {
            id: u.id.clone(),
            username: u.username.clone(),
            display_name: u.display_name.clone(),
            role: u.role,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoginResponse {
    pub token: String,
    pub user_id: UserId,
    pub role: Role,
    pub display_name: String,
    pub expires_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomeworkView {
    pub id: HomeworkId,
    pub title: String,
    pub problem_statement: String,
    pub mode: Mode,
    pub created_by: UserId,
    pub created_at: DateTime<Utc>,
    pub due_at: Option<DateTime<Utc>>,
    /// Instructors only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<String>,
}

impl HomeworkView {
    pub fn new(hw: &Homework, audience: Audience) -> Self {
        Self {
            id: hw.id.clone(),
            title: hw.title.clone(),
            problem_statement: hw.problem_statement.clone(),
            mode: hw.mode,
            created_by: hw.created_by.clone(),
            created_at: hw.created_at,
            due_at: hw.due_at,
            solution: (audience == Audience::Instructor).then(|| hw.solution.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageView {
    pub seq: u32,
    pub author: Author,
    pub content: String,
    pub created_at: DateTime<Utc>,
    /// Instructors only, tutor messages only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard_action: Option<GuardAction>,
}

impl MessageView {
    pub fn new(m: &Message, audience: Audience) -> Self {
        Self {
            seq: m.seq,
            author: m.author,
            content: m.content.clone(),
            created_at: m.created_at,
            guard_action: match audience {
                Audience::Instructor => m.guard_action,
                Audience::Student => None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeView {
    pub score: f64,
    pub feedback: String,
    pub graded_by: UserId,
    pub graded_at: DateTime<Utc>,
}

impl From<&Grade> for GradeView {
    fn from(g: &Grade) -> Self {
        Self {
            score: g.score,
            feedback: g.feedback.clone(),
            graded_by: g.graded_by.clone(),
            graded_at: g.graded_at,
        }
    }
}

/// A session with its full transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: SessionId,
    pub homework_id: HomeworkId,
    pub homework_title: String,
    pub student_id: UserId,
    pub student_display_name: String,
    pub status: SessionStatus,
    pub started_at: DateTime<Utc>,
    pub submitted_at: Option<DateTime<Utc>>,
    pub grade: Option<GradeView>,
    pub messages: Vec<MessageView>,
}

impl SessionView {
    pub fn new(session: &Session, homework: &Homework, student: &User, audience: Audience) -> Self {
        Self {
            id: session.id.clone(),
            homework_id: session.homework_id.clone(),
            homework_title: homework.title.clone(),
            student_id: session.student_id.clone(),
            student_display_name: student.display_name.clone(),
            status: session.status,
            started_at: session.started_at,
            submitted_at: session.submitted_at,
            grade: session.grade.as_ref().map(GradeView::from),
            messages: session
                .messages
                .iter()
                .map(|m| MessageView::new(m, audience))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatTurnResponse {
    pub student_message: MessageView,
    pub tutor_message: MessageView,
    pub guard_action: GuardAction,
    pub session_status: SessionStatus,
}

/// Body of a 503 when the tutor could not answer. The student message and
/// the notice are already in the transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TutorUnavailableResponse {
    pub error: String,
    pub message: String,
    pub retryable: bool,
    pub student_message: MessageView,
    pub notice: MessageView,
    pub session_status: SessionStatus,
}
