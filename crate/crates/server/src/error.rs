use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;
use thiserror::Error;
use tutor_core::{DomainError, PromptError, StoreError};

/// Every error an endpoint can return. Serialized as
/// `{"error": <code>, "message": <text>}`.
#[derive(Debug, Error)]
pub enum ApiError {
    #[error("missing, unknown or expired token")]
    Unauthenticated,
    #[error("invalid credentials")]
    InvalidCredentials,
    #[error("not allowed: {0}")]
    Forbidden(&'static str),
    #[error("{kind} {id} not found")]
    NotFound { kind: &'static str, id: String },
    #[error("{0}")]
    Validation(String),
    #[error("message content must not be empty")]
    EmptyContent,
    #[error("session is {0} and no longer accepts changes")]
    SessionLocked(tutor_core::SessionStatus),
    #[error("{0}")]
    IllegalTransition(String),
    #[error("turn limit of {0} reached")]
    TurnLimitReached(u32),
    #[error("{0}")]
    Conflict(String),
    #[error("internal error")]
    Internal(String),
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::Unauthenticated | ApiError::InvalidCredentials => StatusCode::UNAUTHORIZED,
            ApiError::Forbidden(_) => StatusCode::FORBIDDEN,
            ApiError::NotFound { .. } => StatusCode::NOT_FOUND,
            ApiError::Validation(_) | ApiError::EmptyContent => StatusCode::BAD_REQUEST,
            ApiError::SessionLocked(_)
            | ApiError::IllegalTransition(_)
            | ApiError::TurnLimitReached(_)
            | ApiError::Conflict(_) => StatusCode::CONFLICT,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ApiError::Unauthenticated => "unauthenticated",
            ApiError::InvalidCredentials => "invalid_credentials",
            ApiError::Forbidden(_) => "forbidden",
            ApiError::NotFound { .. } => "not_found",
            ApiError::Validation(_) => "validation_failed",
            ApiError::EmptyContent => "empty_content",
            ApiError::SessionLocked(_) => "session_locked",
            ApiError::IllegalTransition(_) => "illegal_transition",
            ApiError::TurnLimitReached(_) => "turn_limit_reached",
            ApiError::Conflict(_) => "conflict",
            ApiError::Internal(_) => "internal",
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if let ApiError::Internal(detail) = &self {
            tracing::error!(%detail, "request failed");
        }
        let body = json!({ "error": self.code(), "message": self.to_string() });
        (self.status(), Json(body)).into_response()
    }
}

impl From<DomainError> for ApiError {
    fn from(err: DomainError) -> Self {
        match err {
            DomainError::IllegalTransition { .. } => ApiError::IllegalTransition(err.to_string()),
            DomainError::Unauthorized(why) => ApiError::Forbidden(why),
            DomainError::Validation(msg) => ApiError::Validation(msg),
            DomainError::InconsistentInput(msg) => ApiError::Internal(msg),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(err: StoreError) -> Self {
        match err {
            StoreError::NotFound { kind, id } => ApiError::NotFound { kind, id },
            StoreError::SessionLocked(status) => ApiError::SessionLocked(status),
            StoreError::ConflictingReference(msg) => ApiError::Conflict(msg),
            StoreError::DuplicateUsername(name) => {
                ApiError::Conflict(format!("username {name:?} is already taken"))
            }
            StoreError::Domain(err) => err.into(),
            other => ApiError::Internal(other.to_string()),
        }
    }
}

impl From<PromptError> for ApiError {
    fn from(err: PromptError) -> Self {
        match err {
            PromptError::InvalidConfig(msg) => ApiError::Validation(msg),
            PromptError::EmptyField(field) => {
                ApiError::Validation(format!("{field} must not be empty"))
            }
            PromptError::MalformedHistory => ApiError::Internal(err.to_string()),
        }
    }
}

/// `Json` whose rejections use the API error shape.
#[derive(Debug, Clone, Copy, Default, axum::extract::FromRequest)]
#[from_request(via(axum::Json), rejection(ApiError))]
pub struct ApiJson<T>(pub T);

impl From<axum::extract::rejection::JsonRejection> for ApiError {
    fn from(rejection: axum::extract::rejection::JsonRejection) -> Self {
        ApiError::Validation(rejection.body_text())
    }
}
