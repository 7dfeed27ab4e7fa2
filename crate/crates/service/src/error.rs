use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use lode_core::editor::{EditError, ShareError};
use serde::Serialize;
use std::net::SocketAddr;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("model {path}: {message}")]
    Model { path: PathBuf, message: String },
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
}

/// JSON error body: `{"error": {"code": "...", "message": "..."}}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub details: Option<serde_json::Value>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    code: &'a str,
    message: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    details: Option<&'a serde_json::Value>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
            details: None,
        }
    }

    pub fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "session_not_found", format!("no session {id}"))
    }

    pub fn models_unavailable() -> Self {
        Self::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "models_unavailable",
            "models are not loaded",
        )
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({
            "error": ErrorBody {
                code: self.code,
                message: &self.message,
                details: self.details.as_ref(),
            }
        });
        (self.status, Json(body)).into_response()
    }
}

impl From<EditError> for ApiError {
    fn from(e: EditError) -> Self {
        use StatusCode as S;
        let (status, code) = match &e {
            EditError::UnknownSuggestion(_) => (S::UNPROCESSABLE_ENTITY, "unknown_suggestion"),
            EditError::BrushSize(_) => (S::UNPROCESSABLE_ENTITY, "invalid_brush_size"),
            EditError::EmptyFootprint { .. } => (S::UNPROCESSABLE_ENTITY, "empty_footprint"),
            EditError::OutOfBounds(_) => (S::UNPROCESSABLE_ENTITY, "out_of_bounds"),
            EditError::WandBudget(_) => (S::CONFLICT, "wand_budget_exhausted"),
            EditError::RefreshBudget(_) => (S::CONFLICT, "refresh_budget_exhausted"),
            EditError::SpawnPlacement { .. } => (S::UNPROCESSABLE_ENTITY, "invalid_spawn"),
            EditError::NotClientEvent(_) => (S::UNPROCESSABLE_ENTITY, "invalid_event"),
            EditError::EmptyHistory(_) => (S::CONFLICT, "empty_history"),
            EditError::Level(_) => (S::UNPROCESSABLE_ENTITY, "invalid_level"),
            EditError::Replay { .. } | EditError::Suggest(_) => (S::INTERNAL_SERVER_ERROR, "internal"),
        };
        Self::new(status, code, e.to_string())
    }
}

impl From<ShareError> for ApiError {
    fn from(e: ShareError) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_token", e.to_string())
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        log::error!("{e}");
        Self::internal(e.to_string())
    }
}
