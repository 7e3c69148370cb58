//! Role-based access rules. A total, pure function of role, action and
//! ownership.

use super::{Role, User, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    ListHomework,
    /// Read the student-facing part of a homework (no solution).
    ReadHomework,
    ReadHomeworkSolution,
    CreateHomework,
    UpdateHomework,
    DeleteHomework,
    ReadConfig,
    UpdateConfig,
    ManageUsers,
    ListSubmissions,
    StartSession,
    ReadSession,
    PostMessage,
    SubmitSession,
    GradeSession,
}

impl Action {
    pub const ALL: [Action; 15] = [
        Action::ListHomework,
        Action::ReadHomework,
        Action::ReadHomeworkSolution,
        Action::CreateHomework,
        Action::UpdateHomework,
        Action::DeleteHomework,
        Action::ReadConfig,
        Action::UpdateConfig,
        Action::ManageUsers,
        Action::ListSubmissions,
        Action::StartSession,
        Action::ReadSession,
        Action::PostMessage,
        Action::SubmitSession,
        Action::GradeSession,
    ];
}

/// What an action targets. Session references carry the owning student so
/// the decision needs nothing beyond its arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resource<'a> {
    Homework,
    Config,
    Users,
    Session { owner: &'a UserId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Allow,
    Deny,
}

impl Decision {
    pub fn is_allowed(self) -> bool {
        self == Decision::Allow
    }
}

pub fn authorize(user: &User, action: Action, resource: Resource<'_>) -> Decision {
    use Action::*;

    let allowed = match (user.role, resource) {
        (Role::Instructor, Resource::Homework) => matches!(
            action,
            ListHomework
                | ReadHomework
                | ReadHomeworkSolution
                | CreateHomework
                | UpdateHomework
                | DeleteHomework
                | ListSubmissions
        ),
        (Role::Instructor, Resource::Config) => matches!(action, ReadConfig | UpdateConfig),
        (Role::Instructor, Resource::Users) => action == ManageUsers,
        (Role::Instructor, Resource::Session { .. }) => {
            matches!(action, ReadSession | GradeSession)
        }

        (Role::Student, Resource::Homework) => {
            matches!(action, ListHomework | ReadHomework | StartSession)
        }
        (Role::Student, Resource::Session { owner }) => {
            owner == &user.id && matches!(action, ReadSession | PostMessage | SubmitSession)
        }
        (Role::Student, Resource::Config | Resource::Users) => false,
    };
    if allowed {
        Decision::Allow
    } else {
        Decision::Deny
    }
}
