use std::collections::HashMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{DomainError, Homework, Session, SessionId, SessionStatus, User, UserId};

/// Display status for the instructor overview. `NotStarted` is derived,
/// never stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubmissionStatus {
    NotStarted,
    InProgress,
    Submitted,
    Graded,
}

impl From<SessionStatus> for SubmissionStatus {
    fn from(status: SessionStatus) -> Self {
        match status {
            SessionStatus::InProgress => SubmissionStatus::InProgress,
            SessionStatus::Submitted => SubmissionStatus::Submitted,
            SessionStatus::Graded => SubmissionStatus::Graded,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmissionRow {
    pub student_id: UserId,
    pub student_display_name: String,
    pub status: SubmissionStatus,
    pub last_activity_at: Option<DateTime<Utc>>,
    pub session_id: Option<SessionId>,
}

/// One row per student, sorted by display name then id.
pub fn derive_submission_rows(
    homework: &Homework,
    students: &[User],
    sessions: &[Session],
) -> Result<Vec<SubmissionRow>, DomainError> {
    let mut by_student: HashMap<&UserId, &Session> = HashMap::new();
    for session in sessions {
        if session.homework_id != homework.id {
            return Err(DomainError::InconsistentInput(format!(
                "session {} belongs to another homework",
                session.id
            )));
        }
        if !students.iter().any(|s| s.id == session.student_id) {
            return Err(DomainError::InconsistentInput(format!(
                "session {} references unknown student {}",
                session.id, session.student_id
            )));
        }
        by_student
            .entry(&session.student_id)
            .and_modify(|current| {
                if session.started_at > current.started_at {
                    *current = session;
                }
            })
            .or_insert(session);
    }

    let mut rows: Vec<SubmissionRow> = students
        .iter()
        .map(|student| match by_student.get(&student.id) {
            Some(session) => SubmissionRow {
                student_id: student.id.clone(),
                student_display_name: student.display_name.clone(),
                status: session.status.into(),
                last_activity_at: Some(session.last_activity_at()),
                session_id: Some(session.id.clone()),
            },
            None => SubmissionRow {
                student_id: student.id.clone(),
                student_display_name: student.display_name.clone(),
                status: SubmissionStatus::NotStarted,
                last_activity_at: None,
                session_id: None,
            },
        })
        .collect();
    rows.sort_by(|a, b| {
        a.student_display_name
            .cmp(&b.student_display_name)
            .then_with(|| a.student_id.cmp(&b.student_id))
    });
    Ok(rows)
}
