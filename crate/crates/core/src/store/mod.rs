//! Single-file SQLite persistence.
//!
//! All access goes through one connection behind a mutex, so every write
//! (and in particular every change to a given session) is serialized.
//! Transcript turns are committed in one transaction: all messages of the
//! turn or none of them. Triggers reject any `UPDATE` or `DELETE` on the
//! messages table.

mod schema;

use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, SecondsFormat, Utc};
use rusqlite::{params, Connection, OptionalExtension, Row, Transaction};
use thiserror::Error;

use crate::domain::{
    transition, Author, DomainError, Grade, GuardAction, Homework, HomeworkId, Message, Mode, Role,
    Session, SessionEvent, SessionId, SessionStatus, User, UserId,
};
use crate::prompt::{GuardPolicy, TutorConfig};

pub use schema::SCHEMA_VERSION;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("schema version mismatch: store has {found}, expected {expected}")]
    SchemaMismatch { found: i64, expected: i64 },
    #[error("storage failure: {0}")]
    IoFailure(String),
    #[error("{kind} {id} not found")]
    NotFound { kind: &'static str, id: String },
    #[error("conflicting reference: {0}")]
    ConflictingReference(String),
    #[error("username `{0}` is already taken")]
    DuplicateUsername(String),
    #[error("session is {0} and no longer accepts changes")]
    SessionLocked(SessionStatus),
    #[error("sequence gap: expected seq {expected}, got {found}")]
    SequenceGap { expected: u32, found: u32 },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

impl From<rusqlite::Error> for StoreError {
    fn from(err: rusqlite::Error) -> Self {
        StoreError::IoFailure(err.to_string())
    }
}

pub type StoreResult<T> = Result<T, StoreError>;

/// Points inside [`Store::append_messages`] where a one-shot failure can be
/// injected. The transaction is rolled back when a fault fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultSite {
    /// Transaction open, nothing written yet.
    BeforeFirstInsert,
    /// First message of the turn written, the rest not.
    AfterFirstInsert,
    /// All rows written, commit not yet issued.
    BeforeCommit,
}

pub struct Store {
    path: PathBuf,
    conn: Mutex<Connection>,
    fault: Mutex<Option<FaultSite>>,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store").field("path", &self.path).finish()
    }
}

fn ts(at: &DateTime<Utc>) -> String {
    at.to_rfc3339_opts(SecondsFormat::Nanos, true)
}

fn parse_ts(raw: &str) -> rusqlite::Result<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(raw)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| {
            rusqlite::Error::FromSqlConversionFailure(0, rusqlite::types::Type::Text, Box::new(e))
        })
}

fn parse_opt_ts(raw: Option<String>) -> rusqlite::Result<Option<DateTime<Utc>>> {
    raw.as_deref().map(parse_ts).transpose()
}

fn bad_enum(value: &str) -> rusqlite::Error {
    rusqlite::Error::FromSqlConversionFailure(
        0,
        rusqlite::types::Type::Text,
        format!("unexpected enum value `{value}`").into(),
    )
}

fn user_from_row(row: &Row<'_>) -> rusqlite::Result<User> {
    let role: String = row.get("role")?;
    Ok(User {
        id: UserId::from(row.get::<_, String>("id")?),
        username: row.get("username")?,
        display_name: row.get("display_name")?,
        role: Role::parse(&role).ok_or_else(|| bad_enum(&role))?,
        credential_hash: row.get("credential_hash")?,
    })
}

fn homework_from_row(row: &Row<'_>) -> rusqlite::Result<Homework> {
    let mode: String = row.get("mode")?;
    Ok(Homework {
        id: HomeworkId::from(row.get::<_, String>("id")?),
        title: row.get("title")?,
        problem_statement: row.get("problem_statement")?,
        solution: row.get("solution")?,
        mode: Mode::parse(&mode).ok_or_else(|| bad_enum(&mode))?,
        created_by: UserId::from(row.get::<_, String>("created_by")?),
        created_at: parse_ts(&row.get::<_, String>("created_at")?)?,
        due_at: parse_opt_ts(row.get("due_at")?)?,
    })
}

fn message_from_row(row: &Row<'_>) -> rusqlite::Result<Message> {
    let author: String = row.get("author")?;
    let guard: Option<String> = row.get("guard_action")?;
    Ok(Message {
        seq: row.get("seq")?,
        author: Author::parse(&author).ok_or_else(|| bad_enum(&author))?,
        content: row.get("content")?,
        created_at: parse_ts(&row.get::<_, String>("created_at")?)?,
        guard_action: match guard {
            Some(g) => Some(GuardAction::parse(&g).ok_or_else(|| bad_enum(&g))?),
            None => None,
        },
    })
}

/// Session row without messages.
fn session_from_row(row: &Row<'_>) -> rusqlite::Result<Session> {
    let status: String = row.get("status")?;
    let grade = match row.get::<_, Option<f64>>("grade_score")? {
        Some(score) => Some(Grade {
            score,
            feedback: row
                .get::<_, Option<String>>("grade_feedback")?
                .unwrap_or_default(),
            graded_by: UserId::from(row.get::<_, String>("graded_by")?),
            graded_at: parse_ts(&row.get::<_, String>("graded_at")?)?,
        }),
        None => None,
    };
    Ok(Session {
        id: SessionId::from(row.get::<_, String>("id")?),
        homework_id: HomeworkId::from(row.get::<_, String>("homework_id")?),
        student_id: UserId::from(row.get::<_, String>("student_id")?),
        status: SessionStatus::parse(&status).ok_or_else(|| bad_enum(&status))?,
        messages: Vec::new(),
        started_at: parse_ts(&row.get::<_, String>("started_at")?)?,
        submitted_at: parse_opt_ts(row.get("submitted_at")?)?,
        grade,
    })
}

fn load_messages(conn: &Connection, session: &SessionId) -> rusqlite::Result<Vec<Message>> {
    let mut stmt = conn.prepare_cached(
        "SELECT seq, author, content, created_at, guard_action FROM messages
         WHERE session_id = ?1 ORDER BY seq",
    )?;
    let rows = stmt.query_map([session.as_str()], message_from_row)?;
    rows.collect()
}

fn load_session(conn: &Connection, id: &SessionId) -> StoreResult<Session> {
    let mut session = conn
        .query_row(
            "SELECT * FROM sessions WHERE id = ?1",
            [id.as_str()],
            session_from_row,
        )
        .optional()?
        .ok_or_else(|| StoreError::NotFound {
            kind: "session",
            id: id.to_string(),
        })?;
    session.messages = load_messages(conn, id)?;
    Ok(session)
}

fn insert_message(
    tx: &Transaction<'_>,
    session: &SessionId,
    message: &Message,
) -> rusqlite::Result<()> {
    tx.execute(
        "INSERT INTO messages (session_id, seq, author, content, created_at, guard_action)
         VALUES (?1, ?2, ?3, ?4, ?5, ?6)",
        params![
            session.as_str(),
            message.seq,
            message.author.as_str(),
            message.content,
            ts(&message.created_at),
            message.guard_action.map(GuardAction::as_str),
        ],
    )?;
    Ok(())
}

fn get_user_in(conn: &Connection, id: &UserId) -> StoreResult<User> {
    conn.query_row(
        "SELECT * FROM users WHERE id = ?1",
        [id.as_str()],
        user_from_row,
    )
    .optional()?
    .ok_or_else(|| StoreError::NotFound {
        kind: "user",
        id: id.to_string(),
    })
}

impl Store {
    /// Opens or creates the store at `path`. A fresh file gets the full
    /// schema; an existing one must carry [`SCHEMA_VERSION`].
    pub fn open(path: impl AsRef<Path>) -> StoreResult<Self> {
        let path = path.as_ref().to_path_buf();
        let mut conn = Connection::open(&path)?;
        conn.pragma_update(None, "foreign_keys", true)?;
        conn.pragma_update(None, "journal_mode", "WAL")?;
        conn.pragma_update(None, "synchronous", "FULL")?;
        conn.busy_timeout(std::time::Duration::from_secs(5))?;

        let version: i64 = conn.query_row("PRAGMA user_version", [], |r| r.get(0))?;
        match version {
            0 => {
                let existing: i64 = conn.query_row(
                    "SELECT COUNT(*) FROM sqlite_master WHERE type = 'table'",
                    [],
                    |r| r.get(0),
                )?;
                if existing > 0 {
                    return Err(StoreError::SchemaMismatch {
                        found: 0,
                        expected: SCHEMA_VERSION,
                    });
                }
                let tx = conn.transaction()?;
                tx.execute_batch(schema::CREATE)?;
                tx.pragma_update(None, "user_version", SCHEMA_VERSION)?;
                tx.commit()?;
            }
            v if v == SCHEMA_VERSION => {}
            found => {
                return Err(StoreError::SchemaMismatch {
                    found,
                    expected: SCHEMA_VERSION,
                })
            }
        }
        Ok(Self {
            path,
            conn: Mutex::new(conn),
            fault: Mutex::new(None),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Arms a one-shot failure at `site` for the next append.
    pub fn arm_fault(&self, site: FaultSite) {
        *self.fault.lock().unwrap() = Some(site);
    }

    fn trip(&self, site: FaultSite) -> StoreResult<()> {
        let mut armed = self.fault.lock().unwrap();
        if *armed == Some(site) {
            *armed = None;
            return Err(StoreError::IoFailure(format!("injected fault at {site:?}")));
        }
        Ok(())
    }

    fn conn(&self) -> std::sync::MutexGuard<'_, Connection> {
        self.conn
            .lock()
            .unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    // ---- users ----

    /// Inserts or updates a user. The role of an existing user cannot change.
    pub fn put_user(&self, user: &User) -> StoreResult<()> {
        let mut conn = self.conn();
        let tx = conn.transaction()?;
        let existing: Option<String> = tx
            .query_row(
                "SELECT role FROM users WHERE id = ?1",
                [user.id.as_str()],
                |r| r.get(0),
            )
            .optional()?;
        if let Some(role) = existing {
            if role != user.role.as_str() {
                return Err(
                    DomainError::Validation("a user's role is fixed at creation".into()).into(),
                );
            }
        }
        let taken: Option<String> = tx
            .query_row(
                "SELECT id FROM users WHERE username = ?1",
                [user.username.as_str()],
                |r| r.get(0),
            )
            .optional()?;
        if taken.is_some_and(|id| id != user.id.as_str()) {
            return Err(StoreError::DuplicateUsername(user.username.clone()));
        }
        tx.execute(
            "INSERT INTO users (id, username, display_name, role, credential_hash)
             VALUES (?1, ?2, ?3, ?4, ?5)
             ON CONFLICT(id) DO UPDATE SET username = excluded.username,
                 display_name = excluded.display_name, credential_hash = excluded.credential_hash",
            params![
                user.id.as_str(),
                user.username,
                user.display_name,
                user.role.as_str(),
                user.credential_hash
            ],
        )?;
        tx.commit()?;
        Ok(())
    }

    pub fn get_user(&self, id: &UserId) -> StoreResult<User> {
        get_user_in(&self.conn(), id)
    }

    pub fn find_user_by_username(&self, username: &str) -> StoreResult<Option<User>> {
        Ok(self
            .conn()
            .query_row(
                "SELECT * FROM users WHERE username = ?1",
                [username],
                user_from_row,
            )
            .optional()?)
    }

    /// Users ordered by username, optionally filtered by role.
    pub fn list_users(&self, role: Option<Role>) -> StoreResult<Vec<User>> {
        let conn = self.conn();
        let mut stmt = conn
            .prepare("SELECT * FROM users WHERE ?1 IS NULL OR role = ?1 ORDER BY username, id")?;
        let rows = stmt.query_map([role.map(Role::as_str)], user_from_row)?;
        Ok(rows.collect::<Result<_, _>>()?)
    }

    pub fn delete_user(&self, id: &UserId) -> StoreResult<()> {
        let conn = self.conn();
        let referenced: i64 = conn.query_row(
            "SELECT (SELECT COUNT(*) FROM sessions WHERE student_id = ?1 OR graded_by = ?1)
                  + (SELECT COUNT(*) FROM homework WHERE created_by = ?1)",
            [id.as_str()],
            |r| r.get(0),
        )?;
        if referenced > 0 {
            return Err(StoreError::ConflictingReference(format!(
                "user {id} is referenced by homework or sessions"
            )));
        }
        let n = conn.execute("DELETE FROM users WHERE id = ?1", [id.as_str()])?;
        if n == 0 {
            return Err(StoreError::NotFound {
                kind: "user",
                id: id.to_string(),
            });
        }
        Ok(())
    }

    // ---- homework ----

    /// Inserts or replaces a homework. The author must be an instructor.
    pub fn put_homework(&self, homework: &Homework) -> StoreResult<()> {
        homework.validate()?;
        let mut conn = self.conn();
        let tx = conn.transaction()?;
        let author = get_user_in(&tx, &homework.created_by)?;
        if !author.is_instructor() {
            return Err(
                DomainError::Validation("homework authors must be instructors".into()).into(),
            );
        }
        tx.execute(
            "INSERT INTO homework (id, title, problem_statement, solution, mode, created_by, created_at, due_at)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8)
             ON CONFLICT(id) DO UPDATE SET title = excluded.title,
                 problem_statement = excluded.problem_statement, solution = excluded.solution,
                 mode = excluded.mode, created_by = excluded.created_by,
                 created_at = excluded.created_at, due_at = excluded.due_at",
            params![
                homework.id.as_str(),
                homework.title,
                homework.problem_statement,
                homework.solution,
                homework.mode.as_str(),
                homework.created_by.as_str(),
                ts(&homework.created_at),
                homework.due_at.as_ref().map(ts),
            ],
        )?;
        tx.commit()?;
        Ok(())
    }

    pub fn get_homework(&self, id: &HomeworkId) -> StoreResult<Homework> {
        self.conn()
            .query_row(
                "SELECT * FROM homework WHERE id = ?1",
                [id.as_str()],
                homework_from_row,
            )
            .optional()?
            .ok_or_else(|| StoreError::NotFound {
                kind: "homework",
                id: id.to_string(),
            })
    }

    /// All homework, oldest first.
    pub fn list_homework(&self) -> StoreResult<Vec<Homework>> {
        let conn = self.conn();
        let mut stmt = conn.prepare("SELECT * FROM homework ORDER BY created_at, id")?;
        let rows = stmt.query_map([], homework_from_row)?;
        Ok(rows.collect::<Result<_, _>>()?)
    }

    /// Deletes a homework that has no sessions.
    pub fn delete_homework(&self, id: &HomeworkId) -> StoreResult<()> {
        let mut conn = self.conn();
        let tx = conn.transaction()?;
        let sessions: i64 = tx.query_row(
            "SELECT COUNT(*) FROM sessions WHERE homework_id = ?1",
            [id.as_str()],
            |r| r.get(0),
        )?;
        if sessions > 0 {
            return Err(StoreError::ConflictingReference(format!(
                "homework {id} has {sessions} session(s)"
            )));
        }
        let n = tx.execute("DELETE FROM homework WHERE id = ?1", [id.as_str()])?;
        if n == 0 {
            return Err(StoreError::NotFound {
                kind: "homework",
                id: id.to_string(),
            });
        }
        tx.commit()?;
        Ok(())
    }

    // ---- tutor config ----

    /// Stored config, if one was ever saved.
    pub fn stored_config(&self) -> StoreResult<Option<TutorConfig>> {
        let conn = self.conn();
        let row = conn
            .query_row("SELECT * FROM tutor_config WHERE id = 1", [], |row| {
                let policy: String = row.get("guard_policy")?;
                Ok(TutorConfig {
                    model_id: row.get("model_id")?,
                    base_prompt: row.get("base_prompt")?,
                    guard_min_run: row.get("guard_min_run")?,
                    guard_policy: GuardPolicy::parse(&policy).ok_or_else(|| bad_enum(&policy))?,
                    max_turns: row.get("max_turns")?,
                    temperature: row.get("temperature")?,
                })
            })
            .optional()?;
        Ok(row)
    }

    /// Stored config, or the built-in default on a fresh store.
    pub fn get_config(&self) -> StoreResult<TutorConfig> {
        Ok(self.stored_config()?.unwrap_or_default())
    }

    pub fn put_config(&self, config: &TutorConfig) -> StoreResult<()> {
        config
            .validate()
            .map_err(|e| DomainError::Validation(e.to_string()))?;
        self.conn().execute(
            "INSERT INTO tutor_config (id, model_id, base_prompt, guard_min_run, guard_policy, max_turns, temperature)
             VALUES (1, ?1, ?2, ?3, ?4, ?5, ?6)
             ON CONFLICT(id) DO UPDATE SET model_id = excluded.model_id,
                 base_prompt = excluded.base_prompt, guard_min_run = excluded.guard_min_run,
                 guard_policy = excluded.guard_policy, max_turns = excluded.max_turns,
                 temperature = excluded.temperature",
            params![
                config.model_id,
                config.base_prompt,
                config.guard_min_run,
                config.guard_policy.as_str(),
                config.max_turns,
                config.temperature
            ],
        )?;
        Ok(())
    }

    // ---- sessions ----

    /// Returns the student's session for this homework, creating an empty
    /// in-progress one if none exists. The flag is `true` when created.
    pub fn get_or_create_session(
        &self,
        homework_id: &HomeworkId,
        student_id: &UserId,
        now: DateTime<Utc>,
    ) -> StoreResult<(Session, bool)> {
        let mut conn = self.conn();
        let tx = conn.transaction()?;
        let hw_exists: bool = tx
            .query_row(
                "SELECT 1 FROM homework WHERE id = ?1",
                [homework_id.as_str()],
                |_| Ok(()),
            )
            .optional()?
            .is_some();
        if !hw_exists {
            return Err(StoreError::NotFound {
                kind: "homework",
                id: homework_id.to_string(),
            });
        }
        let student = get_user_in(&tx, student_id)?;
        if student.role != Role::Student {
            return Err(DomainError::Unauthorized("only students own sessions").into());
        }
        let existing: Option<String> = tx
            .query_row(
                "SELECT id FROM sessions WHERE homework_id = ?1 AND student_id = ?2",
                [homework_id.as_str(), student_id.as_str()],
                |r| r.get(0),
            )
            .optional()?;
        if let Some(id) = existing {
            let session = load_session(&tx, &SessionId::from(id))?;
            return Ok((session, false));
        }
        let session = Session::start(homework_id.clone(), student_id.clone(), now);
        tx.execute(
            "INSERT INTO sessions (id, homework_id, student_id, status, started_at)
             VALUES (?1, ?2, ?3, ?4, ?5)",
            params![
                session.id.as_str(),
                homework_id.as_str(),
                student_id.as_str(),
                session.status.as_str(),
                ts(&session.started_at)
            ],
        )?;
        tx.commit()?;
        Ok((session, true))
    }

    pub fn get_session(&self, id: &SessionId) -> StoreResult<Session> {
        load_session(&self.conn(), id)
    }

    pub fn find_session(
        &self,
        homework_id: &HomeworkId,
        student_id: &UserId,
    ) -> StoreResult<Option<Session>> {
        let conn = self.conn();
        let id: Option<String> = conn
            .query_row(
                "SELECT id FROM sessions WHERE homework_id = ?1 AND student_id = ?2",
                [homework_id.as_str(), student_id.as_str()],
                |r| r.get(0),
            )
            .optional()?;
        id.map(|id| load_session(&conn, &SessionId::from(id)))
            .transpose()
    }

    /// Sessions of one homework, with transcripts, ordered by start time.
    pub fn list_sessions(&self, homework_id: &HomeworkId) -> StoreResult<Vec<Session>> {
        let conn = self.conn();
        let mut stmt =
            conn.prepare("SELECT * FROM sessions WHERE homework_id = ?1 ORDER BY started_at, id")?;
        let mut sessions = stmt
            .query_map([homework_id.as_str()], session_from_row)?
            .collect::<Result<Vec<_>, _>>()?;
        for session in &mut sessions {
            session.messages = load_messages(&conn, &session.id)?;
        }
        Ok(sessions)
    }

    /// Appends one turn atomically. The session must be in progress and the
    /// turn must continue the sequence without gaps.
    pub fn append_messages(
        &self,
        session_id: &SessionId,
        turn: &[Message],
    ) -> StoreResult<Session> {
        let mut conn = self.conn();
        let tx = conn.transaction()?;
        let session = load_session(&tx, session_id)?;
        if session.status != SessionStatus::InProgress {
            return Err(StoreError::SessionLocked(session.status));
        }
        for (expected, message) in (session.last_seq() + 1..).zip(turn) {
            if message.seq != expected {
                return Err(StoreError::SequenceGap {
                    expected,
                    found: message.seq,
                });
            }
            message.validate()?;
        }

        self.trip(FaultSite::BeforeFirstInsert)?;
        for (index, message) in turn.iter().enumerate() {
            insert_message(&tx, session_id, message)?;
            if index == 0 {
                self.trip(FaultSite::AfterFirstInsert)?;
            }
        }
        self.trip(FaultSite::BeforeCommit)?;
        tx.commit()?;
        drop(conn);

        let mut updated = session;
        updated.messages.extend_from_slice(turn);
        Ok(updated)
    }

    /// Applies a lifecycle event and persists it atomically, optionally
    /// recording a system notice in the same transaction.
    pub fn update_status(
        &self,
        session_id: &SessionId,
        event: SessionEvent,
        actor: &User,
        now: DateTime<Utc>,
        notice: Option<&str>,
    ) -> StoreResult<Session> {
        let mut conn = self.conn();
        let tx = conn.transaction()?;
        let current = load_session(&tx, session_id)?;
        let mut next = transition(&current, event, actor, now)?;

        if let Some(text) = notice {
            let message = Message::notice(current.last_seq() + 1, text, now);
            insert_message(&tx, session_id, &message)?;
            next.messages.push(message);
        }
        let grade = next.grade.as_ref();
        let changed = tx.execute(
            "UPDATE sessions SET status = ?2, submitted_at = ?3, grade_score = ?4,
                 grade_feedback = ?5, graded_by = ?6, graded_at = ?7
             WHERE id = ?1 AND status = ?8",
            params![
                session_id.as_str(),
                next.status.as_str(),
                next.submitted_at.as_ref().map(ts),
                grade.map(|g| g.score),
                grade.map(|g| g.feedback.as_str()),
                grade.map(|g| g.graded_by.as_str()),
                grade.map(|g| ts(&g.graded_at)),
                current.status.as_str(),
            ],
        )?;
        if changed != 1 {
            return Err(StoreError::IoFailure("session changed concurrently".into()));
        }
        tx.commit()?;
        Ok(next)
    }

    // ---- auth tokens ----

    pub fn put_token(
        &self,
        token: &str,
        user: &UserId,
        expires_at: DateTime<Utc>,
    ) -> StoreResult<()> {
        self.conn().execute(
            "INSERT INTO auth_tokens (token, user_id, expires_at) VALUES (?1, ?2, ?3)",
            params![token, user.as_str(), ts(&expires_at)],
        )?;
        Ok(())
    }

    pub fn lookup_token(&self, token: &str) -> StoreResult<Option<(UserId, DateTime<Utc>)>> {
        let conn = self.conn();
        let row = conn
            .query_row(
                "SELECT user_id, expires_at FROM auth_tokens WHERE token = ?1",
                [token],
                |r| {
                    Ok((
                        UserId::from(r.get::<_, String>(0)?),
                        parse_ts(&r.get::<_, String>(1)?)?,
                    ))
                },
            )
            .optional()?;
        Ok(row)
    }

    pub fn purge_expired_tokens(&self, now: DateTime<Utc>) -> StoreResult<usize> {
        Ok(self
            .conn()
            .execute("DELETE FROM auth_tokens WHERE expires_at <= ?1", [ts(&now)])?)
    }
}
