//! Value encoding on the wire.
//!
//! A single instance travels as JSON when primitive and as raw bytes with
//! its stored MIME type when opaque; the `X-Fluidtag-Kind` header names the
//! kind either way. Inside JSON envelopes (query results) opaque values are
//! `{"mime": ..., "base64": ...}`, which no primitive can look like.

use axum::body::Bytes;
use axum::http::header::CONTENT_TYPE;
use axum::http::{HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use fluidtag_core::{classify_value, RawValue, TagValue};
use serde_json::{json, Value as Json};

use crate::error::{ApiError, ApiResult};

pub const KIND_HEADER: &str = "x-fluidtag-kind";
const JSON_MIME: &str = "application/json";

pub fn value_response(value: TagValue) -> Response {
    let kind = HeaderValue::from_static(value.kind().as_str());
    match value {
        TagValue::Opaque(opaque) => {
            let mime = HeaderValue::from_str(&opaque.mime).unwrap_or(HeaderValue::from_static("application/octet-stream"));
            (StatusCode::OK, [(CONTENT_TYPE, mime), (KIND_HEADER.parse().unwrap(), kind)], opaque.bytes).into_response()
        }
        primitive => {
            let body = serde_json::to_vec(&primitive.to_json().expect("primitive")).expect("json");
            (
                StatusCode::OK,
                [(CONTENT_TYPE, HeaderValue::from_static(JSON_MIME)), (KIND_HEADER.parse().unwrap(), kind)],
                body,
            )
                .into_response()
        }
    }
}

pub fn envelope(value: &TagValue) -> Json {
    match value {
        TagValue::Opaque(o) => json!({ "mime": o.mime, "base64": STANDARD.encode(&o.bytes) }),
        primitive => primitive.to_json().expect("primitive"),
    }
}

fn is_json(content_type: &str) -> bool {
    content_type.split(';').next().unwrap_or_default().trim().eq_ignore_ascii_case(JSON_MIME)
}

/// Interprets a PUT body. `application/json` bodies are classified as JSON
/// values; when that yields an opaque value the original bytes and
/// Content-Type are kept verbatim. Any other body is opaque.
pub fn parse_value(headers: &HeaderMap, body: Bytes) -> ApiResult<TagValue> {
    let content_type = match headers.get(CONTENT_TYPE) {
        Some(v) => Some(v.to_str().map_err(|_| ApiError::bad_request("Content-Type is not text"))?.to_string()),
        None => None,
    };
    match content_type {
        Some(ct) if is_json(&ct) => {
            let json: Json = serde_json::from_slice(&body)
                .map_err(|e| ApiError::bad_request(format!("body is not valid JSON: {e}")))?;
            match classify_value(RawValue::Json(json))? {
                TagValue::Opaque(_) => Ok(TagValue::opaque(ct, body.to_vec())),
                primitive => Ok(primitive),
            }
        }
        mime => Ok(classify_value(RawValue::Bytes { bytes: body.to_vec(), mime })?),
    }
}

/// Decodes a JSON body into `T`, reporting failures in the API error format.
pub fn json_body<T: serde::de::DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}
