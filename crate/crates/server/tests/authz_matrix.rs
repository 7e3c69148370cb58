//! Every endpoint, called by every kind of caller, must answer exactly as
//! `authorize` decides: 403 when denied, anything but 401/403 when allowed.

mod common;

use reqwest::{Method, StatusCode};
use serde_json::{json, Value};
use tutor_core::{authorize, Action, Mode, Resource, Role};

use common::{looping_mock, TestApp};

#[derive(Debug, Clone, Copy)]
enum Caller {
    Instructor,
    OwnerStudent,
    OtherStudent,
}

#[derive(Debug, Clone, Copy)]
enum Target {
    Homework,
    Config,
    Users,
    Session,
}

struct Endpoint {
    method: Method,
    path: &'static str,
    action: Action,
    target: Target,
    body: fn() -> Value,
    /// Submit the session first, so grading is a legal transition.
    needs_submitted: bool,
}

fn empty() -> Value {
    json!({})
}

fn endpoints() -> Vec<Endpoint> {
    let e = |method, path, action, target, body, needs_submitted| Endpoint {
        method,
        path,
        action,
        target,
        body,
        needs_submitted,
    };
    vec![
        e(
            Method::GET,
            "/api/homework",
            Action::ListHomework,
            Target::Homework,
            empty,
            false,
        ),
        e(
            Method::GET,
            "/api/homework/{hw}",
            Action::ReadHomework,
            Target::Homework,
            empty,
            false,
        ),
        e(
            Method::POST,
            "/api/homework",
            Action::CreateHomework,
            Target::Homework,
            || json!({"title": "n", "mode": "recall", "statement": "p", "solution": "s"}),
            false,
        ),
        e(
            Method::PUT,
            "/api/homework/{hw}",
            Action::UpdateHomework,
            Target::Homework,
            || json!({"title": "n", "mode": "recall", "statement": "p", "solution": "s"}),
            false,
        ),
        e(
            Method::DELETE,
            "/api/homework/{spare}",
            Action::DeleteHomework,
            Target::Homework,
            empty,
            false,
        ),
        e(
            Method::GET,
            "/api/homework/{hw}/submissions",
            Action::ListSubmissions,
            Target::Homework,
            empty,
            false,
        ),
        e(
            Method::POST,
            "/api/homework/{hw}/session",
            Action::StartSession,
            Target::Homework,
            empty,
            false,
        ),
        e(
            Method::GET,
            "/api/config",
            Action::ReadConfig,
            Target::Config,
            empty,
            false,
        ),
        e(
            Method::PUT,
            "/api/config",
            Action::UpdateConfig,
            Target::Config,
            || json!({"model_id": "m"}),
            false,
        ),
        e(
            Method::GET,
            "/api/users",
            Action::ManageUsers,
            Target::Users,
            empty,
            false,
        ),
        e(
            Method::POST,
            "/api/users",
            Action::ManageUsers,
            Target::Users,
            || json!({"username": "z", "display_name": "Z", "role": "student", "credential": "z"}),
            false,
        ),
        e(
            Method::GET,
            "/api/session/{s}/transcript",
            Action::ReadSession,
            Target::Session,
            empty,
            false,
        ),
        e(
            Method::POST,
            "/api/session/{s}/message",
            Action::PostMessage,
            Target::Session,
            || json!({"content": "hi"}),
            false,
        ),
        e(
            Method::POST,
            "/api/session/{s}/submit",
            Action::SubmitSession,
            Target::Session,
            empty,
            false,
        ),
        e(
            Method::POST,
            "/api/session/{s}/grade",
            Action::GradeSession,
            Target::Session,
            || json!({"score": 50}),
            true,
        ),
    ]
}

#[tokio::test]
async fn http_layer_matches_authorize_for_every_cell() {
    let mut cells = 0;
    for endpoint in endpoints() {
        for caller in [
            Caller::Instructor,
            Caller::OwnerStudent,
            Caller::OtherStudent,
        ] {
            let app = TestApp::spawn(looping_mock()).await;
            let teacher = app.actor("teacher", Role::Instructor);
            let owner = app.actor("owner", Role::Student);
            let other = app.actor("other", Role::Student);
            let hw = app.homework(&teacher, "t", "p", "s", Mode::Recall);
            let spare = app.homework(&teacher, "spare", "p", "s", Mode::Recall);
            let session = app.start(&hw, &owner).await;
            if endpoint.needs_submitted {
                app.post(&format!("/api/session/{session}/submit"), &owner, json!({}))
                    .await;
            }

            let who = match caller {
                Caller::Instructor => &teacher,
                Caller::OwnerStudent => &owner,
                Caller::OtherStudent => &other,
            };
            let resource = match endpoint.target {
                Target::Homework => Resource::Homework,
                Target::Config => Resource::Config,
                Target::Users => Resource::Users,
                Target::Session => Resource::Session {
                    owner: &owner.user.id,
                },
            };
            let allowed = authorize(&who.user, endpoint.action, resource).is_allowed();

            let path = endpoint
                .path
                .replace("{hw}", hw.as_str())
                .replace("{spare}", spare.as_str())
                .replace("{s}", &session);
            let body = (endpoint.method != Method::GET && endpoint.method != Method::DELETE)
                .then(endpoint.body);
            let (status, value, _) = app
                .call(endpoint.method.clone(), &path, Some(&who.token), body)
                .await;

            if allowed {
                assert!(
                    status.is_success(),
                    "{} {} as {caller:?}: expected success, got {status} {value}",
                    endpoint.method,
                    endpoint.path
                );
            } else {
                assert_eq!(
                    status,
                    StatusCode::FORBIDDEN,
                    "{} {} as {caller:?}: expected 403, got {value}",
                    endpoint.method,
                    endpoint.path
                );
            }
            cells += 1;
        }
    }
    assert_eq!(cells, 15 * 3);
}

#[tokio::test]
async fn every_endpoint_requires_a_token() {
    let app = TestApp::spawn(looping_mock()).await;
    for endpoint in endpoints() {
        let path = endpoint
            .path
            .replace("{hw}", "x")
            .replace("{spare}", "x")
            .replace("{s}", "x");
        let (status, body, _) = app
            .call(
                endpoint.method.clone(),
                &path,
                None,
                Some((endpoint.body)()),
            )
            .await;
        assert_eq!(
            status,
            StatusCode::UNAUTHORIZED,
            "{} {}",
            endpoint.method,
            endpoint.path
        );
        assert_eq!(body["error"], "unauthenticated");
    }
}

#[test]
fn matrix_covers_every_action() {
    let covered: std::collections::HashSet<Action> = endpoints().iter().map(|e| e.action).collect();
    for action in Action::ALL {
        if action == Action::ReadHomeworkSolution {
            // Not an endpoint of its own: it decides whether GET includes the solution.
            continue;
        }
        assert!(covered.contains(&action), "{action:?} has no endpoint");
    }
}
