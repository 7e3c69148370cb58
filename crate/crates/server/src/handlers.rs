use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Deserializer};
use tutor_core::{
    derive_submission_rows, Action, Grade, GuardPolicy, Homework, HomeworkId, Mode, Resource, Role,
    SessionEvent, SessionId, SessionStatus, SubmissionRow, TutorConfig, User, UserId,
};

use crate::auth::{require, AuthUser};
use crate::credentials::{hash_credential, new_token, verify_credential};
use crate::error::{ApiError, ApiJson};
use crate::state::AppState;
use crate::turn::{run_turn, TurnOutcome};
use crate::views::{
    Audience, ChatTurnResponse, HomeworkView, LoginResponse, MessageView, SessionView,
    TutorUnavailableResponse, UserView,
};

/// Recorded in the transcript when a student submits.
pub const SUBMITTED_NOTICE: &str = "session submitted for grading";

type ApiResult<T> = Result<T, ApiError>;

// ---- login ----

#[derive(Debug, Deserialize)]
pub struct LoginRequest {
    pub name: String,
    pub credential: String,
}

pub async fn login(
    State(state): State<AppState>,
    ApiJson(req): ApiJson<LoginRequest>,
) -> ApiResult<Json<LoginResponse>> {
    let user = state
        .store
        .find_user_by_username(req.name.trim())?
        .filter(|u| verify_credential(&req.credential, &u.credential_hash))
        .ok_or(ApiError::InvalidCredentials)?;
    let now = Utc::now();
    state.store.purge_expired_tokens(now)?;
    let token = new_token();
    let expires_at = now + state.token_ttl;
    state.store.put_token(&token, &user.id, expires_at)?;
    tracing::info!(user = %user.id, "login");
    Ok(Json(LoginResponse {
        token,
        user_id: user.id,
        role: user.role,
        display_name: user.display_name,
        expires_at,
    }))
}

// ---- users ----

#[derive(Debug, Deserialize)]
pub struct NewUser {
    pub username: String,
    pub display_name: String,
    pub role: Role,
    pub credential: String,
}

pub async fn create_user(
    State(state): State<AppState>,
    AuthUser(actor): AuthUser,
    ApiJson(req): ApiJson<NewUser>,
) -> ApiResult<(StatusCode, Json<UserView>)> {
    require(&actor, Action::ManageUsers, Resource::Users)?;
    let user = new_user(&req.username, &req.display_name, req.role, &req.credential)?;
    state.store.put_user(&user)?;
    Ok((StatusCode::CREATED, Json(UserView::from(&user))))
}

/// Validates and hashes a new account. Shared with the CLI.
pub fn new_user(
    username: &str,
    display_name: &str,
    role: Role,
    credential: &str,
) -> ApiResult<User> {
    let username = username.trim();
    if username.is_empty() || username.chars().any(char::is_whitespace) {
        return Err(ApiError::Validation(
            "username must be nonempty and contain no whitespace".into(),
        ));
    }
    if display_name.trim().is_empty() {
        return Err(ApiError::Validation(
            "display_name must not be empty".into(),
        ));
    }
    if credential.is_empty() {
        return Err(ApiError::Validation("credential must not be empty".into()));
    }
    Ok(User {
        id: UserId::generate(),
        username: username.to_owned(),
        display_name: display_name.trim().to_owned(),
        role,
        credential_hash: hash_credential(credential),
    })
}

pub async fn list_users(
    State(state): State<AppState>,
    AuthUser(actor): AuthUser,
) -> ApiResult<Json<Vec<UserView>>> {
    require(&actor, Action::ManageUsers, Resource::Users)?;
    let users = state.store.list_users(None)?;
    Ok(Json(users.iter().map(UserView::from).collect()))
}

// ---- homework ----

#[derive(Debug, Deserialize)]
pub struct HomeworkInput {
    pub title: String,
    #[serde(alias = "statement")]
    pub problem_statement: String,
    pub solution: String,
    pub mode: Mode,
    #[serde(default)]
    pub due_at: Option<DateTime<Utc>>,
}

pub async fn list_homework(
    State(state): State<AppState>,
    AuthUser(actor): AuthUser,
) -> ApiResult<Json<Vec<HomeworkView>>> {
    require(&actor, Action::ListHomework, Resource::Homework)?;
    let audience = Audience::from(&actor);
    let all = state.store.list_homework()?;
    Ok(Json(
        all.iter()
            .map(|hw| HomeworkView::new(hw, audience))
            .collect(),
    ))
}

pub async fn get_homework(
    State(state): State<AppState>,
    AuthUser(actor): AuthUser,
    Path(id): Path<HomeworkId>,
) -> ApiResult<Json<HomeworkView>> {
    require(&actor, Action::ReadHomework, Resource::Homework)?;
    let hw = state.store.get_homework(&id)?;
    Ok(Json(HomeworkView::new(&hw, Audience::from(&actor))))
}

pub async fn create_homework(
    State(state): State<AppState>,
    AuthUser(actor): AuthUser,
    ApiJson(input): ApiJson<HomeworkInput>,
) -> ApiResult<(StatusCode, Json<HomeworkView>)> {
    require(&actor, Action::CreateHomework, Resource::Homework)?;
    let hw = Homework {
        id: HomeworkId::generate(),
        title: input.title,
        problem_statement: input.problem_statement,
        solution: input.solution,
        mode: input.mode,
        created_by: actor.id.clone(),
        created_at: Utc::now(),
        due_at: input.due_at,
    };
    state.store.put_homework(&hw)?;
    tracing::info!(homework = %hw.id, "homework created");
    Ok((
        StatusCode::CREATED,
        Json(HomeworkView::new(&hw, Audience::Instructor)),
    ))
}

pub async fn update_homework(
    State(state): State<AppState>,
    AuthUser(actor): AuthUser,
    Path(id): Path<HomeworkId>,
    ApiJson(input): ApiJson<HomeworkInput>,
) -> ApiResult<Json<HomeworkView>> {
    require(&actor, Action::UpdateHomework, Resource::Homework)?;
    let existing = state.store.get_homework(&id)?;
    let hw = Homework {
        title: input.title,
        problem_statement: input.problem_statement,
        solution: input.solution,
        mode: input.mode,
        due_at: input.due_at,
        ..existing
    };
    state.store.put_homework(&hw)?;
    Ok(Json(HomeworkView::new(&hw, Audience::Instructor)))
}

pub async fn delete_homework(
    State(state): State<AppState>,
    AuthUser(actor): AuthUser,
    Path(id): Path<HomeworkId>,
) -> ApiResult<StatusCode> {
    require(&actor, Action::DeleteHomework, Resource::Homework)?;
    state.store.delete_homework(&id)?;
    Ok(StatusCode::NO_CONTENT)
}

pub async fn list_submissions(
    State(state): State<AppState>,
    AuthUser(actor): AuthUser,
    Path(id): Path<HomeworkId>,
) -> ApiResult<Json<Vec<SubmissionRow>>> {
    require(&actor, Action::ListSubmissions, Resource::Homework)?;
    let hw = state.store.get_homework(&id)?;
    let students = state.store.list_users(Some(Role::Student))?;
    let sessions = state.store.list_sessions(&id)?;
    Ok(Json(derive_submission_rows(&hw, &students, &sessions)?))
}

// ---- config ----

/// Partial update: absent fields keep their current value. `max_turns: null`
/// removes the limit.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigPatch {
    pub model_id: Option<String>,
    pub base_prompt: Option<String>,
    pub guard_min_run: Option<u32>,
    pub guard_policy: Option<GuardPolicy>,
    #[serde(default, deserialize_with = "present")]
    pub max_turns: Option<Option<u32>>,
    pub temperature: Option<f64>,
}

fn present<'de, D, T>(d: D) -> Result<Option<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    T::deserialize(d).map(Some)
}

impl ConfigPatch {
    pub fn apply(self, mut config: TutorConfig) -> TutorConfig {
        if let Some(v) = self.model_id {
            config.model_id = v;
        }
        if let Some(v) = self.base_prompt {
            config.base_prompt = v;
        }
        if let Some(v) = self.guard_min_run {
            config.guard_min_run = v;
        }
        if let Some(v) = self.guard_policy {
            config.guard_policy = v;
        }
        if let Some(v) = self.max_turns {
            config.max_turns = v;
        }
        if let Some(v) = self.temperature {
            config.temperature = v;
        }
        config
    }
}

pub async fn get_config(
    State(state): State<AppState>,
    AuthUser(actor): AuthUser,
) -> ApiResult<Json<TutorConfig>> {
    require(&actor, Action::ReadConfig, Resource::Config)?;
    Ok(Json(state.store.get_config()?))
}

pub async fn put_config(
    State(state): State<AppState>,
    AuthUser(actor): AuthUser,
    ApiJson(patch): ApiJson<ConfigPatch>,
) -> ApiResult<Json<TutorConfig>> {
    require(&actor, Action::UpdateConfig, Resource::Config)?;
    let config = patch.apply(state.store.get_config()?);
    config.validate()?;
    state.store.put_config(&config)?;
    tracing::info!(model = %config.model_id, "tutor config updated");
    Ok(Json(config))
}

// ---- sessions ----

fn session_view(
    state: &AppState,
    session: &tutor_core::Session,
    audience: Audience,
) -> ApiResult<SessionView> {
    let hw = state.store.get_homework(&session.homework_id)?;
    let student = state.store.get_user(&session.student_id)?;
    Ok(SessionView::new(session, &hw, &student, audience))
}

pub async fn start_session(
    State(state): State<AppState>,
    AuthUser(actor): AuthUser,
    Path(id): Path<HomeworkId>,
) -> ApiResult<(StatusCode, Json<SessionView>)> {
    require(&actor, Action::StartSession, Resource::Homework)?;
    let (session, created) = state
        .store
        .get_or_create_session(&id, &actor.id, Utc::now())?;
    if created {
        tracing::info!(session = %session.id, homework = %id, "session started");
    }
    let status = if created {
        StatusCode::CREATED
    } else {
        StatusCode::OK
    };
    Ok((
        status,
        Json(session_view(&state, &session, Audience::Student)?),
    ))
}

pub async fn get_transcript(
    State(state): State<AppState>,
    AuthUser(actor): AuthUser,
    Path(id): Path<SessionId>,
) -> ApiResult<Json<SessionView>> {
    let session = state.store.get_session(&id)?;
    require(
        &actor,
        Action::ReadSession,
        Resource::Session {
            owner: &session.student_id,
        },
    )?;
    Ok(Json(session_view(
        &state,
        &session,
        Audience::from(&actor),
    )?))
}

#[derive(Debug, Deserialize)]
pub struct PostMessage {
    pub content: String,
}

pub async fn post_message(
    State(state): State<AppState>,
    AuthUser(actor): AuthUser,
    Path(id): Path<SessionId>,
    ApiJson(body): ApiJson<PostMessage>,
) -> ApiResult<Response> {
    let audience = Audience::from(&actor);
    let outcome = run_turn(&state, &id, &actor, body.content).await?;
    Ok(match outcome {
        TurnOutcome::Completed {
            student,
            tutor,
            guard_action,
            session_status,
        } => Json(ChatTurnResponse {
            student_message: MessageView::new(&student, audience),
            tutor_message: MessageView::new(&tutor, audience),
            guard_action,
            session_status,
        })
        .into_response(),
        TurnOutcome::Degraded {
            student,
            notice,
            retryable,
            session_status,
        } => {
            let status = if retryable {
                StatusCode::SERVICE_UNAVAILABLE
            } else {
                StatusCode::BAD_GATEWAY
            };
            let body = TutorUnavailableResponse {
                error: "tutor_unavailable".into(),
                message: notice.content.clone(),
                retryable,
                student_message: MessageView::new(&student, audience),
                notice: MessageView::new(&notice, audience),
                session_status,
            };
            (status, Json(body)).into_response()
        }
    })
}

pub async fn submit_session(
    State(state): State<AppState>,
    AuthUser(actor): AuthUser,
    Path(id): Path<SessionId>,
) -> ApiResult<Json<SessionView>> {
    let _turn = state.locks.acquire(&id).await;
    let session = state.store.get_session(&id)?;
    require(
        &actor,
        Action::SubmitSession,
        Resource::Session {
            owner: &session.student_id,
        },
    )?;
    if session.status != SessionStatus::InProgress {
        return Err(ApiError::SessionLocked(session.status));
    }
    let updated = state
        .store
        .update_status(
            &id,
            SessionEvent::Submit,
            &actor,
            Utc::now(),
            Some(SUBMITTED_NOTICE),
        )
        .map_err(|err| match err {
            tutor_core::StoreError::Domain(tutor_core::DomainError::IllegalTransition {
                from,
                ..
            }) => ApiError::SessionLocked(from),
            other => other.into(),
        })?;
    tracing::info!(session = %id, "session submitted");
    Ok(Json(session_view(&state, &updated, Audience::Student)?))
}

#[derive(Debug, Deserialize)]
pub struct GradeInput {
    pub score: f64,
    #[serde(default)]
    pub feedback: String,
}

pub async fn grade_session(
    State(state): State<AppState>,
    AuthUser(actor): AuthUser,
    Path(id): Path<SessionId>,
    ApiJson(input): ApiJson<GradeInput>,
) -> ApiResult<Json<SessionView>> {
    let session = state.store.get_session(&id)?;
    require(
        &actor,
        Action::GradeSession,
        Resource::Session {
            owner: &session.student_id,
        },
    )?;
    let now = Utc::now();
    let grade = Grade {
        score: input.score,
        feedback: input.feedback,
        graded_by: actor.id.clone(),
        graded_at: now,
    };
    let updated = state
        .store
        .update_status(&id, SessionEvent::Grade(grade), &actor, now, None)?;
    tracing::info!(session = %id, score = input.score, "session graded");
    Ok(Json(session_view(&state, &updated, Audience::Instructor)?))
}
