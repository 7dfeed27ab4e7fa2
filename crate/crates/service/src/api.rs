use crate::analytics;
use crate::{ApiError, AppState, Models};
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use lode_core::editor::{
    encode_share_token, originality_score, Anchor, BrushSize, BrushStroke, EditAction, Session, RED_THRESHOLD,
};
use lode_core::level::{Cell, Level, Theme, TileKind};
use lode_core::playability::{check_playability, PlayabilityReport};
use lode_core::suggest::Variance;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

type Shared = State<Arc<AppState>>;
type ApiResult<T> = Result<Json<T>, ApiError>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/api/session", post(create_session))
        .route("/api/session/{id}", get(get_session))
        .route("/api/session/{id}/edit", post(edit))
        .route("/api/session/{id}/refresh", post(refresh))
        .route("/api/session/{id}/undo", post(undo))
        .route("/api/session/{id}/redo", post(redo))
        .route("/api/session/{id}/clear", post(clear))
        .route("/api/session/{id}/events", post(post_events))
        .route("/api/session/{id}/check", post(check))
        .route("/api/session/{id}/share", get(share))
        .route("/api/level/{token}", get(shared_level))
        .route("/api/analytics/{kind}", get(get_analytics))
        .with_state(state)
}

/// Model inference and fsync both block; keep them off the async workers.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ApiError::new(e.status(), "invalid_body", e.body_text()))
}

fn models(state: &AppState) -> Result<&Models, ApiError> {
    state.models.as_ref().ok_or_else(ApiError::models_unavailable)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestionView {
    pub id: u8,
    pub theme: Theme,
    pub variance: Variance,
    pub level: Level,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetView {
    pub refreshes_used: u32,
    pub refreshes_left: u32,
    pub refresh_limit: u32,
    pub wand_used: u32,
    pub wand_left: u32,
    pub wand_limit: u32,
}

/// Everything a client needs to draw the editor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    /// Rows of tile glyphs; the spawn is drawn as `M`.
    pub level: Level,
    pub spawn: Option<Cell>,
    pub generation: u32,
    pub suggestions: Vec<SuggestionView>,
    pub budgets: BudgetView,
    pub can_undo: bool,
    pub can_redo: bool,
    /// Originality in percent; absent when no scoring model is loaded.
    pub score: Option<f64>,
    /// True when the score is below the red threshold.
    pub score_low: bool,
}

fn score(state: &AppState, level: &Level) -> Result<Option<f64>, ApiError> {
    match &state.models {
        Some(m) => originality_score(level, m.scorer.as_ref())
            .map(Some)
            .map_err(|e| ApiError::internal(e.to_string())),
        None => Ok(None),
    }
}

fn view(state: &AppState, s: &Session) -> Result<SessionView, ApiError> {
    let score = score(state, s.level())?;
    let b = s.budgets();
    Ok(SessionView {
        id: s.id().to_string(),
        level: s.level().clone(),
        spawn: s.level().spawn(),
        generation: s.generation(),
        suggestions: s
            .suggestions()
            .iter()
            .map(|x| SuggestionView {
                id: x.id,
                theme: x.theme,
                variance: x.variance,
                level: x.level.clone(),
            })
            .collect(),
        budgets: BudgetView {
            refreshes_used: s.refreshes_used(),
            refreshes_left: s.refreshes_left(),
            refresh_limit: b.refreshes,
            wand_used: s.wand_tiles_used(),
            wand_left: s.wand_tiles_left(),
            wand_limit: b.wand_tiles,
        },
        can_undo: s.undo_depth() > 0,
        can_redo: s.redo_depth() > 0,
        score,
        score_low: score.is_some_and(|v| v < RED_THRESHOLD),
    })
}

async fn health(State(state): Shared) -> Json<serde_json::Value> {
    Json(serde_json::json!({
        "status": "ok",
        "models_loaded": state.models.is_some(),
        "sessions": state.store.len(),
    }))
}

async fn create_session(State(state): Shared) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    blocking(move || {
        let m = models(&state)?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session = Session::with_budgets(id, rand::random(), state.config.budgets, m.source.as_ref())?;
        let out = view(&state, &session)?;
        state.store.insert(session)?;
        Ok((StatusCode::CREATED, Json(out)))
    })
    .await
}

async fn get_session(State(state): Shared, Path(id): Path<String>) -> ApiResult<SessionView> {
    blocking(move || {
        let s = state.store.read(&id, Session::clone)?;
        view(&state, &s).map(Json)
    })
    .await
}

/// Body of `POST /api/session/{id}/edit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tool", rename_all = "snake_case")]
pub enum EditRequest {
    Brush {
        suggestion_id: u8,
        size: u8,
        anchor: Anchor,
    },
    Erase {
        size: u8,
        anchor: Anchor,
    },
    Wand {
        cell: Cell,
    },
    Spawn {
        cell: Cell,
    },
}

#[derive(Debug, Serialize)]
struct EditResponse {
    changed: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    tile: Option<TileKind>,
    #[serde(flatten)]
    session: SessionView,
}

async fn edit(
    State(state): Shared,
    Path(id): Path<String>,
    payload: Result<Json<EditRequest>, JsonRejection>,
) -> Result<Json<EditResponse>, ApiError> {
    let req = body(payload)?;
    blocking(move || {
        let (changed, tile, s) = state.store.update(&id, |s| {
            let (changed, tile) = match req {
                EditRequest::Brush {
                    suggestion_id,
                    size,
                    anchor,
                } => {
                    let stroke = BrushStroke {
                        suggestion_id,
                        size: BrushSize::new(size)?,
                        anchor,
                    };
                    (s.apply_brush(stroke)?, None)
                }
                EditRequest::Erase { size, anchor } => (s.apply_eraser(BrushSize::new(size)?, anchor)?, None),
                EditRequest::Wand { cell } => {
                    let before = s.level().get_signed(cell.col as i64, cell.row as i64);
                    let tile = s.apply_wand(cell)?;
                    (u32::from(before != Some(tile)), Some(tile))
                }
                EditRequest::Spawn { cell } => {
                    let before = s.level().spawn();
                    s.place_spawn(cell)?;
                    (u32::from(before != Some(cell)), None)
                }
            };
            Ok((changed, tile, s.clone()))
        })?;
        Ok(Json(EditResponse {
            changed,
            tile,
            session: view(&state, &s)?,
        }))
    })
    .await
}

async fn refresh(State(state): Shared, Path(id): Path<String>) -> ApiResult<SessionView> {
    blocking(move || {
        let m = models(&state)?.clone();
        let s = state.store.update(&id, |s| {
            s.refresh(m.source.as_ref())?;
            Ok(s.clone())
        })?;
        view(&state, &s).map(Json)
    })
    .await
}

async fn clear(State(state): Shared, Path(id): Path<String>) -> ApiResult<SessionView> {
    blocking(move || {
        let m = models(&state)?.clone();
        let s = state.store.update(&id, |s| {
            s.clear_all(m.source.as_ref())?;
            Ok(s.clone())
        })?;
        view(&state, &s).map(Json)
    })
    .await
}

#[derive(Debug, Serialize)]
struct HistoryResponse {
    /// False when there was nothing to undo or redo; the session is unchanged.
    applied: bool,
    #[serde(flatten)]
    session: SessionView,
}

async fn undo(State(state): Shared, Path(id): Path<String>) -> Result<Json<HistoryResponse>, ApiError> {
    history(state, id, Session::undo).await
}

async fn redo(State(state): Shared, Path(id): Path<String>) -> Result<Json<HistoryResponse>, ApiError> {
    history(state, id, Session::redo).await
}

async fn history(
    state: Arc<AppState>,
    id: String,
    op: fn(&mut Session) -> bool,
) -> Result<Json<HistoryResponse>, ApiError> {
    blocking(move || {
        let (applied, s) = state.store.update(&id, |s| Ok((op(s), s.clone())))?;
        Ok(Json(HistoryResponse {
            applied,
            session: view(&state, &s)?,
        }))
    })
    .await
}

#[derive(Debug, Deserialize)]
struct EventBatch {
    events: Vec<serde_json::Value>,
}

#[derive(Debug, Serialize)]
struct EventProblem {
    index: usize,
    message: String,
}

/// Client telemetry. The whole batch is rejected if any record is invalid;
/// `win` and `share` get the server's own token and score.
async fn post_events(
    State(state): Shared,
    Path(id): Path<String>,
    payload: Result<Json<EventBatch>, JsonRejection>,
) -> ApiResult<serde_json::Value> {
    let batch = body(payload)?;
    let mut actions = Vec::with_capacity(batch.events.len());
    let mut problems = Vec::new();
    for (index, value) in batch.events.into_iter().enumerate() {
        match serde_json::from_value::<EditAction>(value) {
            Ok(a) if a.is_client_event() => actions.push(a),
            Ok(a) => problems.push(EventProblem {
                index,
                message: format!("`{}` cannot be posted as an event", a.name()),
            }),
            Err(e) => problems.push(EventProblem {
                index,
                message: e.to_string(),
            }),
        }
    }
    if !problems.is_empty() {
        let mut err = ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "invalid_events",
            format!("{} of the posted events are invalid", problems.len()),
        );
        err.details = Some(serde_json::to_value(problems).expect("problems serialize"));
        return Err(err);
    }
    blocking(move || {
        let accepted = actions.len();
        state.store.update(&id, |s| {
            for action in actions {
                let action = match action {
                    EditAction::Win { .. } => EditAction::Win {
                        token: encode_share_token(s.level()).ok(),
                        originality: score(&state, s.level())?,
                    },
                    EditAction::Share { .. } => EditAction::Share {
                        token: encode_share_token(s.level()).ok(),
                    },
                    other => other,
                };
                s.record(action)?;
            }
            Ok(())
        })?;
        Ok(Json(serde_json::json!({ "accepted": accepted })))
    })
    .await
}

async fn check(State(state): Shared, Path(id): Path<String>) -> ApiResult<PlayabilityReport> {
    blocking(move || state.store.read(&id, |s| check_playability(s.level())).map(Json)).await
}

#[derive(Debug, Serialize, Deserialize)]
struct ShareView {
    token: String,
    path: String,
}

async fn share(State(state): Shared, Path(id): Path<String>) -> ApiResult<ShareView> {
    let level = state.store.read(&id, |s| s.level().clone())?;
    let token = encode_share_token(&level)?;
    Ok(Json(ShareView {
        path: format!("/api/level/{token}"),
        token,
    }))
}

async fn shared_level(Path(token): Path<String>) -> ApiResult<serde_json::Value> {
    let level = lode_core::editor::decode_share_token(&token)?;
    Ok(Json(serde_json::json!({
        "token": token,
        "spawn": level.spawn(),
        "level": level,
    })))
}

async fn get_analytics(State(state): Shared, Path(kind): Path<String>) -> ApiResult<serde_json::Value> {
    blocking(move || {
        let records = state.store.journal().read_all()?;
        let a = analytics::compute(&records);
        let v = match kind.as_str() {
            "suggestions" => serde_json::to_value(a.suggestions),
            "refreshes" => serde_json::to_value(a.refreshes),
            "originality" => serde_json::to_value(a.originality),
            "heatmaps" => serde_json::to_value(a.heatmaps),
            other => {
                return Err(ApiError::new(
                    StatusCode::NOT_FOUND,
                    "unknown_analytics",
                    format!("no analytics named {other:?}; expected suggestions, refreshes, originality or heatmaps"),
                ))
            }
        };
        v.map(Json).map_err(|e| ApiError::internal(e.to_string()))
    })
    .await
}
