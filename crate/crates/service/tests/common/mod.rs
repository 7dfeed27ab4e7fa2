#![allow(dead_code)]

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use http_body_util::BodyExt;
use lode_core::editor::Reconstructor;
use lode_core::level::{Level, TileKind, HEIGHT, WIDTH};
use lode_core::suggest::{SuggestError, SuggestionSet, SuggestionSource};
use lode_core::vae::{Vae, VaeConfig, VaeError, VaeModel};
use lode_service::{router, AppState, Models, ServiceConfig};
use serde_json::Value;
use std::sync::Arc;
use tower::ServiceExt;

/// Fixed suggestion grid:
/// 0 solid floor row 21 with gold at (5,20); 1 gold sealed in solid at (20,10);
/// 2 all ladder; 3 all rope; 4 all gold; 5 all enemy.
pub struct Fixture;

pub fn fixture_levels() -> Vec<Level> {
    let mut floor = Level::empty();
    for c in 0..WIDTH {
        floor.set(lode_core::level::Cell::new(c, HEIGHT - 1), TileKind::Solid);
    }
    floor.set(lode_core::level::Cell::new(5, HEIGHT - 2), TileKind::Gold);
    let mut sealed = Level::filled(WIDTH, HEIGHT, TileKind::Solid);
    sealed.set(lode_core::level::Cell::new(20, 10), TileKind::Gold);
    vec![
        floor,
        sealed,
        Level::filled(WIDTH, HEIGHT, TileKind::Ladder),
        Level::filled(WIDTH, HEIGHT, TileKind::Rope),
        Level::filled(WIDTH, HEIGHT, TileKind::Gold),
        Level::filled(WIDTH, HEIGHT, TileKind::Enemy),
    ]
}

impl SuggestionSource for Fixture {
    fn generate(&self, _: &Level, seed: u64, generation: u32) -> Result<SuggestionSet, SuggestError> {
        SuggestionSet::from_levels(seed, generation, fixture_levels())
    }
}

/// Reconstructs every level as all-Empty, so the score is the share of
/// non-Empty cells.
pub struct EmptyScorer;

impl Reconstructor for EmptyScorer {
    fn reconstruct_level(&self, _: &Level) -> Result<Level, VaeError> {
        Ok(Level::empty())
    }
}

pub fn fixture_models() -> Models {
    Models::new(Arc::new(Fixture), Arc::new(EmptyScorer))
}

pub fn tiny_vae(seed: u64) -> VaeModel {
    Vae::new(VaeConfig {
        hidden_dims: vec![12],
        latent_dim: 6,
        seed,
        ..VaeConfig::desk()
    })
    .unwrap()
}

pub fn vae_models() -> Models {
    Models::from_vaes(tiny_vae(1), tiny_vae(2), tiny_vae(3), tiny_vae(4))
}

pub struct TestApp {
    pub dir: tempfile::TempDir,
    pub state: Arc<AppState>,
}

impl TestApp {
    pub fn new(models: Option<Models>) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let state = Arc::new(AppState::open(ServiceConfig::new(dir.path()), models).unwrap());
        Self { dir, state }
    }

    /// Reopens the same data directory as a fresh process would.
    pub fn reopen(&self, models: Option<Models>) -> Arc<AppState> {
        Arc::new(AppState::open(ServiceConfig::new(self.dir.path()), models).unwrap())
    }

    pub async fn call(&self, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
        call(&self.state, method, uri, body).await
    }

    pub async fn create(&self) -> Value {
        let (status, v) = self.call(Method::POST, "/api/session", None).await;
        assert_eq!(status, StatusCode::CREATED, "{v}");
        v
    }
}

pub async fn call(state: &Arc<AppState>, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = router(state.clone()).oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, v)
}

pub fn level_of(v: &Value) -> Level {
    serde_json::from_value(v["level"].clone()).unwrap()
}

pub fn error_code(v: &Value) -> &str {
    v["error"]["code"].as_str().unwrap_or("")
}
