//! HTTP API and operational commands for the guided homework tutor.
//!
//! [`app::router`] builds the axum application over an [`AppState`]. The
//! chat turn pipeline lives in [`turn`].

pub mod app;
pub mod auth;
pub mod credentials;
pub mod error;
pub mod export;
pub mod handlers;
pub mod seed;
pub mod settings;
pub mod state;
pub mod turn;
pub mod views;

pub use app::router;
pub use error::ApiError;
pub use state::AppState;
