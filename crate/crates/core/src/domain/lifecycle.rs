//! Submission lifecycle: `InProgress -> Submitted -> Graded`, nothing else.

use chrono::{DateTime, Utc};

use super::{DomainError, Grade, Session, SessionStatus, User};

#[derive(Debug, Clone, PartialEq)]
pub enum SessionEvent {
    Submit,
    Grade(Grade),
}

impl SessionEvent {
    pub fn name(&self) -> &'static str {
        match self {
            SessionEvent::Submit => "submit",
            SessionEvent::Grade(_) => "grade",
        }
    }
}

/// Applies `event` to `session` on behalf of `actor`. Messages are never
/// touched. Grading checks the actor's role before the session status.
pub fn transition(
    session: &Session,
    event: SessionEvent,
    actor: &User,
    now: DateTime<Utc>,
) -> Result<Session, DomainError> {
    let event_name = event.name();
    let mut next = session.clone();
    match (session.status, event) {
        (_, SessionEvent::Grade(_)) if !actor.is_instructor() => {
            return Err(DomainError::Unauthorized("only instructors grade"));
        }
        (SessionStatus::InProgress, SessionEvent::Submit) => {
            next.status = SessionStatus::Submitted;
            next.submitted_at = Some(now);
        }
        (SessionStatus::Submitted, SessionEvent::Grade(grade)) => {
            grade.validate()?;
            next.status = SessionStatus::Graded;
            next.grade = Some(grade);
        }
        (from, _) => {
            return Err(DomainError::IllegalTransition {
                from,
                event: event_name,
            })
        }
    }
    Ok(next)
}
