use axum::extract::FromRequestParts;
use axum::http::header::AUTHORIZATION;
use axum::http::request::Parts;
use chrono::Utc;
use tutor_core::{authorize, Action, Resource, User};

use crate::error::ApiError;
use crate::state::AppState;

/// The caller, resolved from `Authorization: Bearer <token>`. Rejects with
/// 401 when the token is missing, unknown or expired.
#[derive(Debug, Clone)]
pub struct AuthUser(pub User);

impl FromRequestParts<AppState> for AuthUser {
    type Rejection = ApiError;

    async fn from_request_parts(
        parts: &mut Parts,
        state: &AppState,
    ) -> Result<Self, Self::Rejection> {
        let token = parts
            .headers
            .get(AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .ok_or(ApiError::Unauthenticated)?;
        let (user_id, expires_at) = state
            .store
            .lookup_token(token)?
            .ok_or(ApiError::Unauthenticated)?;
        if expires_at <= Utc::now() {
            return Err(ApiError::Unauthenticated);
        }
        match state.store.get_user(&user_id) {
            Ok(user) => Ok(AuthUser(user)),
            Err(tutor_core::StoreError::NotFound { .. }) => Err(ApiError::Unauthenticated),
            Err(err) => Err(err.into()),
        }
    }
}

pub fn require(user: &User, action: Action, resource: Resource<'_>) -> Result<(), ApiError> {
    if authorize(user, action, resource).is_allowed() {
        Ok(())
    } else {
        Err(ApiError::Forbidden(
            "role or ownership does not permit this action",
        ))
    }
}
