//! Plain-text transcript export, one UTF-8 file per session.
//!
//! ```text
//! homework: Data types
//! student: Alice Rossi (alice)
//! status: graded
//! grade: 90
//! feedback: Clear reasoning.
//! started_at: 2025-01-15T09:00:00+00:00
//! submitted_at: 2025-01-15T09:30:00+00:00
//!
//! [1] [student] [2025-01-15T09:01:00+00:00]
//! message text, verbatim
//!
//! [2] [tutor] [2025-01-15T09:01:02+00:00]
//! ...
//! ```
//!
//! Header values that span lines continue on lines indented by two spaces.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use thiserror::Error;
use tutor_core::{Homework, HomeworkId, Session, Store, StoreError, User};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn stamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, false)
}

fn header(out: &mut String, key: &str, value: &str) {
    let mut lines = value.split('\n');
    let _ = writeln!(out, "{key}: {}", lines.next().unwrap_or(""));
    for line in lines {
        let _ = writeln!(out, "  {line}");
    }
}

pub fn render_transcript(homework: &Homework, student: &User, session: &Session) -> String {
    let mut out = String::new();
    header(&mut out, "homework", &homework.title);
    header(
        &mut out,
        "student",
        &format!("{} ({})", student.display_name, student.username),
    );
    header(&mut out, "status", session.status.as_str());
    match &session.grade {
        Some(grade) => {
            header(&mut out, "grade", &grade.score.to_string());
            header(&mut out, "feedback", &grade.feedback);
        }
        None => header(&mut out, "grade", "none"),
    }
    header(&mut out, "started_at", &stamp(&session.started_at));
    if let Some(at) = &session.submitted_at {
        header(&mut out, "submitted_at", &stamp(at));
    }
    for m in &session.messages {
        let _ = write!(
            out,
            "\n[{}] [{}] [{}]\n{}\n",
            m.seq,
            m.author.as_str(),
            stamp(&m.created_at),
            m.content
        );
    }
    out
}

fn file_name(student: &User, session: &Session) -> String {
    let safe: String = student
        .username
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{safe}_{}.txt", session.id)
}

/// Writes every session of `homework_id` into `out_dir`, creating it if
/// needed. Returns the paths written.
pub fn export_transcripts(
    store: &Store,
    homework_id: &HomeworkId,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, ExportError> {
    let homework = store.get_homework(homework_id)?;
    let sessions = store.list_sessions(homework_id)?;
    std::fs::create_dir_all(out_dir).map_err(|source| ExportError::Write {
        path: out_dir.to_owned(),
        source,
    })?;
    let mut written = Vec::with_capacity(sessions.len());
    for session in &sessions {
        let student = store.get_user(&session.student_id)?;
        let path = out_dir.join(file_name(&student, session));
        std::fs::write(&path, render_transcript(&homework, &student, session)).map_err(
            |source| ExportError::Write {
                path: path.clone(),
                source,
            },
        )?;
        written.push(path);
    }
    Ok(written)
}
