//! Core library for a guided homework tutor.
//!
//! Instructors author assignments that carry a hidden solution; students work
//! through them in a turn-based conversation with an LLM that is told never to
//! give the solution away and whose replies are mechanically screened for
//! copied solution text. Instructors grade by reading the logged transcript.
//!
//! The crate is split by responsibility:
//!
//! - [`domain`]: entities, the submission lifecycle and authorization rules (no I/O).
//! - [`prompt`]: deterministic system-prompt assembly and the solution-leak guard.
//! - [`gateway`]: chat-completion client with retries, plus a scripted mock provider.
//! - [`store`]: single-file SQLite persistence with atomic, append-only transcripts.

pub mod demo;
pub mod domain;
pub mod gateway;
pub mod prompt;
pub mod store;

pub use domain::{
    authorize, derive_submission_rows, transition, Action, Author, Decision, DomainError, Grade,
    GuardAction, Homework, HomeworkId, Message, Mode, Resource, Role, Session, SessionEvent,
    SessionId, SessionStatus, SubmissionRow, SubmissionStatus, User, UserId,
};
pub use gateway::{CompletionResult, Gateway, GatewayError, ProviderSettings};
pub use prompt::{
    assemble_prompt, guard_reply, guard_retry, render_mode_directive, GuardPolicy, GuardReport,
    LeakRun, PromptBundle, PromptError, TutorConfig,
};
pub use store::{FaultSite, Store, StoreError};
