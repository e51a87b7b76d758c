use std::collections::BTreeSet;
use std::fmt;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;
use thiserror::Error;

use super::Number;

pub const DEFAULT_OPAQUE_MIME: &str = "application/octet-stream";
const JSON_MIME: &str = "application/json";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValueError {
    #[error("invalid MIME type {0:?}")]
    InvalidMime(String),
    #[error("malformed value: {0}")]
    Malformed(String),
}

/// Value stored in a tag instance.
///
/// Every kind except `Opaque` is primitive: indexed and searchable by content.
/// Opaque payloads are kept byte-exact with their MIME type and can only be
/// searched for by presence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum TagValue {
    Integer(i64),
    Float(f64),
    Boolean(bool),
    String(String),
    Null,
    StringSet(BTreeSet<String>),
    Opaque(Opaque),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Opaque {
    pub mime: String,
    #[serde(with = "base64_bytes")]
    pub bytes: Vec<u8>,
}

mod base64_bytes {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&BASE64.encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let text = String::deserialize(d)?;
        BASE64.decode(text).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueKind {
    Integer,
    Float,
    Boolean,
    String,
    Null,
    StringSet,
    Opaque,
}

impl ValueKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ValueKind::Integer => "integer",
            ValueKind::Float => "float",
            ValueKind::Boolean => "boolean",
            ValueKind::String => "string",
            ValueKind::Null => "null",
            ValueKind::StringSet => "string-set",
            ValueKind::Opaque => "opaque",
        }
    }

    pub fn is_primitive(&self) -> bool {
        *self != ValueKind::Opaque
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl TagValue {
    pub fn kind(&self) -> ValueKind {
        match self {
            TagValue::Integer(_) => ValueKind::Integer,
            TagValue::Float(_) => ValueKind::Float,
            TagValue::Boolean(_) => ValueKind::Boolean,
            TagValue::String(_) => ValueKind::String,
            TagValue::Null => ValueKind::Null,
            TagValue::StringSet(_) => ValueKind::StringSet,
            TagValue::Opaque(_) => ValueKind::Opaque,
        }
    }

    pub fn is_primitive(&self) -> bool {
        self.kind().is_primitive()
    }

    pub fn opaque(mime: impl Into<String>, bytes: impl Into<Vec<u8>>) -> TagValue {
        TagValue::Opaque(Opaque { mime: mime.into(), bytes: bytes.into() })
    }

    pub fn string_set<I, S>(items: I) -> TagValue
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        TagValue::StringSet(items.into_iter().map(Into::into).collect())
    }

    pub fn as_number(&self) -> Option<Number> {
        match *self {
            TagValue::Integer(i) => Some(Number::Int(i)),
            TagValue::Float(f) => Number::float(f),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            TagValue::String(s) => Some(s),
            _ => None,
        }
    }

    /// Strings and string sets both read as a set; used where a tag may hold
    /// either a single name or several.
    pub fn as_name_set(&self) -> Option<BTreeSet<String>> {
        match self {
            TagValue::String(s) => Some(BTreeSet::from([s.clone()])),
            TagValue::StringSet(set) => Some(set.clone()),
            _ => None,
        }
    }

    /// JSON rendering of a primitive value; `None` for opaque values, which
    /// travel as raw bytes.
    pub fn to_json(&self) -> Option<Json> {
        Some(match self {
            TagValue::Integer(i) => Json::from(*i),
            TagValue::Float(f) => Json::from(*f),
            TagValue::Boolean(b) => Json::Bool(*b),
            TagValue::String(s) => Json::String(s.clone()),
            TagValue::Null => Json::Null,
            TagValue::StringSet(set) => Json::Array(set.iter().cloned().map(Json::String).collect()),
            TagValue::Opaque(_) => return None,
        })
    }
}

/// Untyped input as it arrives over the wire.
#[derive(Debug, Clone)]
pub enum RawValue {
    /// A JSON document.
    Json(Json),
    /// An arbitrary byte payload with an optional declared MIME type.
    Bytes { bytes: Vec<u8>, mime: Option<String> },
}

fn valid_mime(mime: &str) -> bool {
    let essence = mime.split(';').next().unwrap_or_default().trim();
    let token = |s: &str| {
        !s.is_empty()
            && s.chars().all(|c| c.is_ascii_alphanumeric() || "!#$&^_.+-".contains(c))
    };
    matches!(essence.split_once('/'), Some((t, s)) if token(t) && token(s))
}

/// Sorts a raw value into a primitive kind or an opaque payload.
///
/// JSON integers, floats, booleans, strings, `null` and arrays made only of
/// strings are primitive (the array becomes a string set). Any other JSON
/// document is kept opaque as `application/json`. Byte payloads are opaque
/// with their declared MIME type, or `application/octet-stream` if none.
pub fn classify_value(raw: RawValue) -> Result<TagValue, ValueError> {
    match raw {
        RawValue::Json(json) => Ok(classify_json(json)),
        RawValue::Bytes { bytes, mime } => {
            let mime = mime.unwrap_or_else(|| DEFAULT_OPAQUE_MIME.to_string());
            if !valid_mime(&mime) {
                return Err(ValueError::InvalidMime(mime));
            }
            Ok(TagValue::opaque(mime, bytes))
        }
    }
}

fn classify_json(json: Json) -> TagValue {
    match json {
        Json::Null => TagValue::Null,
        Json::Bool(b) => TagValue::Boolean(b),
        Json::String(s) => TagValue::String(s),
        Json::Number(n) => match n.as_i64() {
            Some(i) => TagValue::Integer(i),
            // u64 beyond i64 range and non-integral tokens.
            None => TagValue::Float(n.as_f64().unwrap_or(f64::NAN)),
        },
        Json::Array(items) if items.iter().all(Json::is_string) => TagValue::StringSet(
            items
                .into_iter()
                .filter_map(|v| match v {
                    Json::String(s) => Some(s),
                    _ => None,
                })
                .collect(),
        ),
        other => TagValue::opaque(JSON_MIME, serde_json::to_vec(&other).unwrap_or_default()),
    }
}
