#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use critters_service::{router, AppState, Config, ManualClock};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

pub const ADMIN: &str = "secret-admin";
pub const START_MS: u64 = 1_700_000_000_000;

pub struct TestApp {
    pub dir: tempfile::TempDir,
    pub clock: ManualClock,
    pub state: AppState,
    pub router: Router,
}

pub fn open(dir: &Path, clock: &ManualClock) -> AppState {
    let mut config = Config::new(dir);
    config.admin_token = Some(ADMIN.into());
    config.clock = Arc::new(clock.clone());
    AppState::open(config).unwrap()
}

impl TestApp {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let clock = ManualClock::new(START_MS);
        let state = open(dir.path(), &clock);
        TestApp { router: router(state.clone()), dir, clock, state }
    }

    /// A fresh server over the same data directory.
    pub fn restart(&self) -> AppState {
        open(self.dir.path(), &self.clock)
    }

    pub async fn raw(&self, method: &str, uri: &str, body: Option<&str>, token: Option<&str>) -> (StatusCode, String) {
        let mut req = Request::builder().method(method).uri(uri);
        if body.is_some() {
            req = req.header("content-type", "application/json");
        }
        if let Some(t) = token {
            req = req.header("authorization", format!("Bearer {t}"));
        }
        let req = req.body(body.map_or_else(Body::empty, |b| Body::from(b.to_string()))).unwrap();
        let res = self.router.clone().oneshot(req).await.unwrap();
        let status = res.status();
        let bytes = res.into_body().collect().await.unwrap().to_bytes();
        (status, String::from_utf8(bytes.to_vec()).unwrap())
    }

    pub async fn call(&self, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
        let text = body.map(|b| b.to_string());
        let (status, out) = self.raw(method, uri, text.as_deref(), None).await;
        (status, serde_json::from_str(&out).unwrap_or(Value::Null))
    }

    pub async fn player(&self, name: &str) -> String {
        let (status, body) = self.call("POST", "/api/players", Some(json!({ "displayName": name }))).await;
        assert_eq!(status, StatusCode::CREATED, "{body}");
        body["playerId"].as_str().unwrap().to_string()
    }

    pub async fn session(&self, player: &str, level: &str) -> String {
        let (status, body) =
            self.call("POST", "/api/sessions", Some(json!({ "player": player, "level": level, "seed": 7 }))).await;
        assert_eq!(status, StatusCode::CREATED, "{body}");
        body["sessionId"].as_str().unwrap().to_string()
    }

    pub async fn put_tests(&self, session: &str, setup: Value) -> (StatusCode, Value) {
        self.call("PUT", &format!("/api/sessions/{session}/tests"), Some(setup)).await
    }

    pub async fn run(&self, session: &str) -> (StatusCode, Value) {
        self.call("POST", &format!("/api/sessions/{session}/run"), None).await
    }

    /// Plays one game and returns the run response.
    pub async fn play(&self, player: &str, level: &str, setup: Value, seconds: u64) -> Value {
        let s = self.session(player, level).await;
        let (status, body) = self.put_tests(&s, setup).await;
        assert_eq!(status, StatusCode::OK, "{body}");
        self.clock.advance(seconds * 1000);
        let (status, body) = self.run(&s).await;
        assert_eq!(status, StatusCode::OK, "{body}");
        body
    }
}

pub fn shirt_is(color: &str) -> Value {
    json!([{ "kind": "assertEq", "lhs": { "kind": "attr", "name": "shirt" }, "rhs": { "kind": "lit", "value": color } }])
}

pub fn orange_portal() -> Value {
    json!({ "tile": [6, 2], "test": shirt_is("orange") })
}

pub fn red_portal() -> Value {
    json!({ "tile": [3, 2], "test": shirt_is("red") })
}

pub fn short_loop_test() -> Value {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures/loop01-short-test.json")).unwrap();
    json!({ "signposts": [{ "signpost": 0, "test": serde_json::from_str::<Value>(&text).unwrap() }] })
}

/// A player who scored 1100 on base-01 and so may play the loop levels.
pub async fn unlocked_player(app: &TestApp, name: &str) -> String {
    let p = app.player(name).await;
    let body = app.play(&p, "base-01", json!({ "portals": [red_portal(), orange_portal()] }), 0).await;
    assert_eq!(body["score"]["total"], 1100);
    p
}
