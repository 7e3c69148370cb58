/// Bumped on any incompatible schema change. Opening a store written with a
/// different version fails; there is no migration path.
pub const SCHEMA_VERSION: i64 = 1;

pub(super) const CREATE: &str = r#"
CREATE TABLE users (
    id              TEXT PRIMARY KEY,
    username        TEXT NOT NULL UNIQUE,
    display_name    TEXT NOT NULL,
    role            TEXT NOT NULL CHECK (role IN ('instructor', 'student')),
    credential_hash BLOB NOT NULL
);

CREATE TABLE homework (
    id                TEXT PRIMARY KEY,
    title             TEXT NOT NULL,
    problem_statement TEXT NOT NULL,
    solution          TEXT NOT NULL,
    mode              TEXT NOT NULL CHECK (mode IN ('recall', 'discovery')),
    created_by        TEXT NOT NULL REFERENCES users(id) ON DELETE RESTRICT,
    created_at        TEXT NOT NULL,
    due_at            TEXT
);

CREATE TABLE tutor_config (
    id            INTEGER PRIMARY KEY CHECK (id = 1),
    model_id      TEXT NOT NULL,
    base_prompt   TEXT NOT NULL,
    guard_min_run INTEGER NOT NULL CHECK (guard_min_run >= 4),
    guard_policy  TEXT NOT NULL,
    max_turns     INTEGER,
    temperature   REAL NOT NULL
);

CREATE TABLE sessions (
    id             TEXT PRIMARY KEY,
    homework_id    TEXT NOT NULL REFERENCES homework(id) ON DELETE RESTRICT,
    student_id     TEXT NOT NULL REFERENCES users(id) ON DELETE RESTRICT,
    status         TEXT NOT NULL CHECK (status IN ('in_progress', 'submitted', 'graded')),
    started_at     TEXT NOT NULL,
    submitted_at   TEXT,
    grade_score    REAL,
    grade_feedback TEXT,
    graded_by      TEXT REFERENCES users(id),
    graded_at      TEXT,
    UNIQUE (homework_id, student_id)
);

CREATE TABLE messages (
    session_id   TEXT NOT NULL REFERENCES sessions(id) ON DELETE RESTRICT,
    seq          INTEGER NOT NULL CHECK (seq >= 1),
    author       TEXT NOT NULL CHECK (author IN ('student', 'tutor', 'system_notice')),
    content      TEXT NOT NULL,
    created_at   TEXT NOT NULL,
    guard_action TEXT,
    PRIMARY KEY (session_id, seq)
);

CREATE TRIGGER messages_no_update BEFORE UPDATE ON messages
BEGIN
    SELECT RAISE(ABORT, 'messages are append-only');
END;

CREATE TRIGGER messages_no_delete BEFORE DELETE ON messages
BEGIN
    SELECT RAISE(ABORT, 'messages are append-only');
END;

CREATE TABLE auth_tokens (
    token      TEXT PRIMARY KEY,
    user_id    TEXT NOT NULL REFERENCES users(id) ON DELETE CASCADE,
    expires_at TEXT NOT NULL
);
"#;
