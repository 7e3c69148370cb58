//! One chat turn: student message in, guarded tutor reply out, committed as
//! a unit.

use chrono::Utc;
use tutor_core::{
    assemble_prompt, guard_reply, guard_retry, Action, GatewayError, GuardAction, Message,
    Resource, Session, SessionId, SessionStatus, User,
};

use crate::auth::require;
use crate::error::ApiError;
use crate::state::AppState;

/// Recorded when the provider gives no usable reply.
pub const TUTOR_UNAVAILABLE_NOTICE: &str = "tutor unavailable, please retry";
/// Recorded when the tutor reply could not be saved.
pub const TURN_NOT_SAVED_NOTICE: &str = "the tutor reply could not be saved, please retry";

#[derive(Debug)]
pub enum TurnOutcome {
    Completed {
        student: Message,
        tutor: Message,
        guard_action: GuardAction,
        session_status: SessionStatus,
    },
    /// The student message was kept and followed by a notice.
    Degraded {
        student: Message,
        notice: Message,
        retryable: bool,
        session_status: SessionStatus,
    },
}

pub async fn run_turn(
    state: &AppState,
    session_id: &SessionId,
    actor: &User,
    content: String,
) -> Result<TurnOutcome, ApiError> {
    let store = &state.store;
    let _turn = state.locks.acquire(session_id).await;

    let session = store.get_session(session_id)?;
    require(
        actor,
        Action::PostMessage,
        Resource::Session {
            owner: &session.student_id,
        },
    )?;
    if session.status != SessionStatus::InProgress {
        return Err(ApiError::SessionLocked(session.status));
    }
    if content.trim().is_empty() {
        return Err(ApiError::EmptyContent);
    }
    let config = store.get_config()?;
    if let Some(limit) = config.max_turns {
        if session.student_turns() >= limit as usize {
            return Err(ApiError::TurnLimitReached(limit));
        }
    }
    let homework = store.get_homework(&session.homework_id)?;

    let student = Message::student(session.last_seq() + 1, content, Utc::now());
    let mut history = session.messages.clone();
    history.push(student.clone());
    let bundle = assemble_prompt(&config, &homework, &history)?;

    let reply = match state.gateway.complete(&bundle).await {
        Ok(reply) => reply,
        Err(err) => {
            tracing::warn!(session = %session_id, error = %err, "tutor call failed");
            let retryable = matches!(
                err,
                GatewayError::ProviderUnavailable { .. } | GatewayError::EmptyCompletion
            );
            return degrade(
                state,
                &session,
                student,
                TUTOR_UNAVAILABLE_NOTICE,
                retryable,
            );
        }
    };

    let (mut text, report) = guard_reply(&reply.content, &homework, &config);
    let mut action = report.action_taken;
    if action == GuardAction::Regenerated {
        tracing::info!(session = %session_id, runs = report.runs.len(), "reply leaked solution text, regenerating");
        match state.gateway.complete(&bundle).await {
            Ok(second) => {
                let (retried, report) = guard_retry(&second.content, &homework, &config);
                text = retried;
                action = report.action_taken;
            }
            Err(err) => {
                tracing::warn!(session = %session_id, error = %err, "regeneration failed, redacting");
                action = GuardAction::Redacted;
            }
        }
    }
    if action == GuardAction::Redacted {
        tracing::info!(session = %session_id, "reply redacted");
    }

    let tutor = Message::tutor(student.seq + 1, text, action, Utc::now());
    match store.append_messages(session_id, &[student.clone(), tutor.clone()]) {
        Ok(updated) => Ok(TurnOutcome::Completed {
            student,
            tutor,
            guard_action: action,
            session_status: updated.status,
        }),
        Err(err) => {
            tracing::warn!(session = %session_id, error = %err, "turn append failed");
            degrade(state, &session, student, TURN_NOT_SAVED_NOTICE, true)
        }
    }
}

/// Commits the student message followed by a notice. Provider error text is
/// logged only: it can echo the request, which carries the solution.
fn degrade(
    state: &AppState,
    session: &Session,
    student: Message,
    notice_text: &str,
    retryable: bool,
) -> Result<TurnOutcome, ApiError> {
    let notice = Message::notice(student.seq + 1, notice_text, Utc::now());
    let updated = state
        .store
        .append_messages(&session.id, &[student.clone(), notice.clone()])?;
    Ok(TurnOutcome::Degraded {
        student,
        notice,
        retryable,
        session_status: updated.status,
    })
}
