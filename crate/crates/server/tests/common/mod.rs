#![allow(dead_code)]

use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use consortium_core::fixtures::{self, seed_fixture, SeedProfile};
use consortium_core::{AuthConfig, Consortium};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

pub fn test_config() -> AuthConfig {
    AuthConfig {
        hash_rounds: 1_000,
        ..AuthConfig::default()
    }
}

pub fn seeded(profile: SeedProfile) -> Arc<Consortium> {
    let c = Consortium::in_memory_with_clock(test_config(), fixtures::fixture_clock());
    seed_fixture(&c, profile).expect("seed");
    Arc::new(c)
}

/// In-process client driving the router one request at a time.
#[derive(Clone)]
pub struct Api {
    pub consortium: Arc<Consortium>,
    router: Router,
}

pub struct Reply {
    pub status: StatusCode,
    pub content_type: Option<String>,
    pub bytes: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.bytes).unwrap_or_else(|e| {
            panic!(
                "status {} body is not JSON ({e}): {}",
                self.status,
                String::from_utf8_lossy(&self.bytes)
            )
        })
    }
}

impl Api {
    pub fn new(consortium: Arc<Consortium>) -> Self {
        let router = consortium_server::router(Arc::clone(&consortium));
        Api { consortium, router }
    }

    pub async fn raw(
        &self,
        method: Method,
        uri: &str,
        token: Option<&str>,
        content_type: Option<&str>,
        body: Vec<u8>,
    ) -> Reply {
        let mut req = Request::builder().method(method).uri(uri);
        if let Some(t) = token {
            req = req.header(header::AUTHORIZATION, format!("Bearer {t}"));
        }
        if let Some(ct) = content_type {
            req = req.header(header::CONTENT_TYPE, ct);
        }
        let resp = self
            .router
            .clone()
            .oneshot(req.body(Body::from(body)).unwrap())
            .await
            .unwrap();
        let status = resp.status();
        let content_type = resp
            .headers()
            .get(header::CONTENT_TYPE)
            .map(|v| v.to_str().unwrap().to_owned());
        let bytes = resp
            .into_body()
            .collect()
            .await
            .unwrap()
            .to_bytes()
            .to_vec();
        Reply {
            status,
            content_type,
            bytes,
        }
    }

    pub async fn call(
        &self,
        method: Method,
        uri: &str,
        token: Option<&str>,
        body: Option<Value>,
    ) -> (StatusCode, Value) {
        let (ct, bytes) = match body {
            Some(v) => (Some("application/json"), serde_json::to_vec(&v).unwrap()),
            None => (None, Vec::new()),
        };
        let reply = self.raw(method, uri, token, ct, bytes).await;
        let json = reply.json();
        (reply.status, json)
    }

    pub async fn get(&self, uri: &str, token: &str) -> (StatusCode, Value) {
        self.call(Method::GET, uri, Some(token), None).await
    }

    pub async fn login(&self, username: &str, password: &str) -> String {
        let (status, body) = self
            .call(
                Method::POST,
                "/api/v1/auth/login",
                None,
                Some(serde_json::json!({"username": username, "password": password})),
            )
            .await;
        assert_eq!(status, StatusCode::OK, "login {username}: {body}");
        body["token"].as_str().unwrap().to_owned()
    }

    pub async fn admin(&self) -> String {
        self.login(fixtures::ADMIN_USERNAME, fixtures::ADMIN_PASSWORD)
            .await
    }

    pub async fn focal(&self, n: usize) -> String {
        self.login(&fixtures::focal_username(n), fixtures::FOCAL_PASSWORD)
            .await
    }

    pub fn head(&self) -> u64 {
        self.consortium.store().head()
    }
}
