use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use fluidtag_core::{PathError, QueryError, StoreError, ValueError};
use serde::Serialize;

/// Error body: `{"error": <code>, "message": <text>}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

#[derive(Serialize)]
struct Body<'a> {
    error: &'a str,
    message: &'a str,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into() }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad-request", message)
    }

    pub fn unauthenticated() -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "unauthenticated", "a valid bearer token is required")
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not-found", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let message = e.to_string();
        match e {
            StoreError::Unauthenticated => ApiError::unauthenticated(),
            StoreError::PermissionDenied(_) => ApiError::new(StatusCode::FORBIDDEN, "permission-denied", message),
            StoreError::NotFound(_) => ApiError::not_found(message),
            StoreError::Duplicate(_) => ApiError::new(StatusCode::CONFLICT, "duplicate", message),
            StoreError::Immutable(_) => ApiError::new(StatusCode::PRECONDITION_FAILED, "immutable", message),
            StoreError::Path(_) | StoreError::Invalid(_) => ApiError::bad_request(message),
            StoreError::Locked(_) | StoreError::Corrupt(_) | StoreError::Io(_) => {
                log::error!("store failure: {message}");
                ApiError::internal(message)
            }
        }
    }
}

impl From<PathError> for ApiError {
    fn from(e: PathError) -> Self {
        ApiError::bad_request(e.to_string())
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "query-syntax", e.to_string())
    }
}

impl From<ValueError> for ApiError {
    fn from(e: ValueError) -> Self {
        ApiError::bad_request(e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(Body { error: self.code, message: &self.message })).into_response()
    }
}

pub type ApiResult<T> = Result<T, ApiError>;
