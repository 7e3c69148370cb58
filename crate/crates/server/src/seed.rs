//! Demo data: one instructor, three students and the two sample assignments.

use chrono::Utc;
use tutor_core::{demo, Homework, Role, Store, StoreError, User, UserId};

use crate::credentials::hash_credential;

pub const DEMO_INSTRUCTOR: (&str, &str) = ("teacher", "Course Instructor");
pub const DEMO_STUDENTS: [(&str, &str); 3] = [
    ("alice", "Alice Rossi"),
    ("bob", "Bob Bianchi"),
    ("carol", "Carol Verdi"),
];

#[derive(Debug, Default)]
pub struct SeedReport {
    pub created_users: Vec<String>,
    pub created_homework: Vec<Homework>,
    pub skipped: Vec<String>,
}

/// Idempotent: users and assignments that already exist (by username or
/// title) are left alone.
pub fn seed_demo(store: &Store, credential: &str) -> Result<SeedReport, StoreError> {
    let mut report = SeedReport::default();
    let accounts = std::iter::once((DEMO_INSTRUCTOR, Role::Instructor))
        .chain(DEMO_STUDENTS.iter().map(|s| (*s, Role::Student)));
    let mut instructor = None;
    for ((username, display_name), role) in accounts {
        if let Some(existing) = store.find_user_by_username(username)? {
            report.skipped.push(format!("user {username}"));
            if role == Role::Instructor {
                instructor = Some(existing.id);
            }
            continue;
        }
        let user = User {
            id: UserId::generate(),
            username: username.to_owned(),
            display_name: display_name.to_owned(),
            role,
            credential_hash: hash_credential(credential),
        };
        store.put_user(&user)?;
        if role == Role::Instructor {
            instructor = Some(user.id.clone());
        }
        report.created_users.push(username.to_owned());
    }
    let author = instructor.expect("instructor seeded above");
    if store.get_user(&author)?.role != Role::Instructor {
        return Err(tutor_core::DomainError::Validation(format!(
            "existing user {} is not an instructor",
            DEMO_INSTRUCTOR.0
        ))
        .into());
    }

    let titles: Vec<String> = store
        .list_homework()?
        .into_iter()
        .map(|h| h.title)
        .collect();
    let now = Utc::now();
    for hw in [
        demo::data_types(&author, now),
        demo::discovering_bootstrap(&author, now),
    ] {
        if titles.contains(&hw.title) {
            report.skipped.push(format!("homework {:?}", hw.title));
            continue;
        }
        store.put_homework(&hw)?;
        report.created_homework.push(hw);
    }
    Ok(report)
}
