//! Test harness: the real router on an ephemeral port, backed by a temp
//! SQLite file and a scripted mock provider.

#![allow(dead_code)]

use std::sync::Arc;
use std::time::Duration;

use chrono::Utc;
use reqwest::{Method, StatusCode};
use serde_json::{json, Value};
use tempfile::TempDir;
use tutor_core::gateway::mock::{MockProvider, ScriptedOutcome};
use tutor_core::gateway::{ChatBackend, RetryPolicy};
use tutor_core::{Gateway, Homework, HomeworkId, Mode, Role, Store, User, UserId};
use tutor_server::credentials::{hash_credential, new_token};
use tutor_server::AppState;

pub struct TestApp {
    pub base: String,
    pub client: reqwest::Client,
    pub store: Arc<Store>,
    pub mock: Arc<MockProvider>,
    _dir: TempDir,
}

pub struct Actor {
    pub user: User,
    pub token: String,
}

pub fn replies(texts: &[&str]) -> Vec<ScriptedOutcome> {
    texts.iter().map(|t| ScriptedOutcome::reply(*t)).collect()
}

/// A mock that answers every request with the same Socratic question.
pub fn looping_mock() -> MockProvider {
    MockProvider::new(replies(&["What would you try next?"]))
        .unwrap()
        .looping()
}

impl TestApp {
    pub async fn spawn(mock: MockProvider) -> Self {
        Self::spawn_with(mock, 0).await
    }

    pub async fn spawn_with(mock: MockProvider, max_retries: u32) -> Self {
        let mock = Arc::new(mock);
        Self::serve(mock.clone(), mock, max_retries).await
    }

    /// Serves a custom backend. `mock` is then an idle placeholder.
    pub async fn spawn_backend(backend: Arc<dyn ChatBackend>) -> Self {
        Self::serve(backend, Arc::new(looping_mock()), 0).await
    }

    async fn serve(
        backend: Arc<dyn ChatBackend>,
        mock: Arc<MockProvider>,
        max_retries: u32,
    ) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let store = Arc::new(Store::open(dir.path().join("api.db")).unwrap());
        let gateway = Gateway::new(
            backend,
            RetryPolicy {
                max_retries,
                backoff_base: Duration::ZERO,
            },
        );
        let app = tutor_server::router(AppState::new(store.clone(), gateway));
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
        Self {
            base: format!("http://{addr}"),
            client: reqwest::Client::new(),
            store,
            mock,
            _dir: dir,
        }
    }

    /// Creates an account directly in the store with a live token. The
    /// credential is the username.
    pub fn actor(&self, username: &str, role: Role) -> Actor {
        let user = User {
            id: UserId::generate(),
            username: username.into(),
            display_name: format!("{username} display"),
            role,
            credential_hash: hash_credential(username),
        };
        self.store.put_user(&user).unwrap();
        let token = new_token();
        self.store
            .put_token(&token, &user.id, Utc::now() + chrono::Duration::hours(1))
            .unwrap();
        Actor { user, token }
    }

    pub fn homework(
        &self,
        author: &Actor,
        title: &str,
        statement: &str,
        solution: &str,
        mode: Mode,
    ) -> HomeworkId {
        let hw = Homework {
            id: HomeworkId::generate(),
            title: title.into(),
            problem_statement: statement.into(),
            solution: solution.into(),
            mode,
            created_by: author.user.id.clone(),
            created_at: Utc::now(),
            due_at: None,
        };
        self.store.put_homework(&hw).unwrap();
        hw.id
    }

    pub async fn call(
        &self,
        method: Method,
        path: &str,
        token: Option<&str>,
        body: Option<Value>,
    ) -> (StatusCode, Value, String) {
        let mut req = self.client.request(method, format!("{}{path}", self.base));
        if let Some(t) = token {
            req = req.bearer_auth(t);
        }
        if let Some(b) = body {
            req = req.json(&b);
        }
        let resp = req.send().await.unwrap();
        let status = resp.status();
        let text = resp.text().await.unwrap();
        let value = serde_json::from_str(&text).unwrap_or(Value::Null);
        (status, value, text)
    }

    pub async fn get(&self, path: &str, who: &Actor) -> (StatusCode, Value) {
        let (s, v, _) = self.call(Method::GET, path, Some(&who.token), None).await;
        (s, v)
    }

    pub async fn post(&self, path: &str, who: &Actor, body: Value) -> (StatusCode, Value) {
        let (s, v, _) = self
            .call(Method::POST, path, Some(&who.token), Some(body))
            .await;
        (s, v)
    }

    pub async fn put(&self, path: &str, who: &Actor, body: Value) -> (StatusCode, Value) {
        let (s, v, _) = self
            .call(Method::PUT, path, Some(&who.token), Some(body))
            .await;
        (s, v)
    }

    pub async fn start(&self, hw: &HomeworkId, who: &Actor) -> String {
        let (status, body) = self
            .post(&format!("/api/homework/{hw}/session"), who, json!({}))
            .await;
        assert!(status.is_success(), "start session: {status} {body}");
        body["id"].as_str().unwrap().to_owned()
    }

    pub async fn say(&self, session: &str, who: &Actor, content: &str) -> (StatusCode, Value) {
        self.post(
            &format!("/api/session/{session}/message"),
            who,
            json!({ "content": content }),
        )
        .await
    }
}
