use axum::routing::{get, post};
use axum::Router;

use crate::handlers::*;
use crate::state::AppState;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/login", post(login))
        .route("/api/users", get(list_users).post(create_user))
        .route("/api/homework", get(list_homework).post(create_homework))
        .route(
            "/api/homework/{id}",
            get(get_homework)
                .put(update_homework)
                .delete(delete_homework),
        )
        .route("/api/homework/{id}/session", post(start_session))
        .route("/api/homework/{id}/submissions", get(list_submissions))
        .route("/api/config", get(get_config).put(put_config))
        .route("/api/session/{id}/message", post(post_message))
        .route("/api/session/{id}/submit", post(submit_session))
        .route("/api/session/{id}/transcript", get(get_transcript))
        .route("/api/session/{id}/grade", post(grade_session))
        .with_state(state)
}
