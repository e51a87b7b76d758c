use std::collections::BTreeMap;
use std::time::Duration;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use fluidtag_core::model::{ObjectId, TagPath, TagValue};
use fluidtag_core::publish::{Catalog, CatalogError, TaggedObject};
use fluidtag_core::{classify_value, RawValue};
use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use reqwest::blocking::{Client, RequestBuilder, Response};
use reqwest::header::CONTENT_TYPE;
use reqwest::StatusCode;
use serde_json::{json, Value};

/// Everything except unreserved characters, so `/` in about-values is sent
/// as `%2F` and the server splits about from tag exactly.
const SEGMENT: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'.').remove(b'_').remove(b'~');

const KIND_HEADER: &str = "x-fluidtag-kind";

/// [`Catalog`] over the HTTP API.
pub struct HttpCatalog {
    base: String,
    token: Option<String>,
    client: Client,
}

impl HttpCatalog {
    pub fn new(base: &str, token: Option<&str>) -> Result<Self, CatalogError> {
        let client = Client::builder()
            .timeout(Duration::from_secs(60))
            .build()
            .map_err(|e| CatalogError::Unavailable(e.to_string()))?;
        Ok(HttpCatalog { base: base.trim_end_matches('/').to_string(), token: token.map(str::to_string), client })
    }

    fn request(&self, builder: RequestBuilder) -> RequestBuilder {
        match &self.token {
            Some(t) => builder.bearer_auth(t),
            None => builder,
        }
    }

    fn send(&self, builder: RequestBuilder) -> Result<Response, CatalogError> {
        let response = self.request(builder).send().map_err(|e| CatalogError::Unavailable(e.to_string()))?;
        if response.status().is_success() {
            return Ok(response);
        }
        Err(error_from(response))
    }

    fn json(&self, builder: RequestBuilder) -> Result<Value, CatalogError> {
        self.send(builder)?.json().map_err(|e| CatalogError::Unavailable(format!("bad response: {e}")))
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }
}

fn error_from(response: Response) -> CatalogError {
    let status = response.status();
    let message = response
        .json::<Value>()
        .ok()
        .and_then(|v| v.get("message").and_then(Value::as_str).map(str::to_string))
        .unwrap_or_else(|| status.to_string());
    match status {
        StatusCode::UNAUTHORIZED => CatalogError::Unauthenticated,
        StatusCode::FORBIDDEN | StatusCode::PRECONDITION_FAILED => CatalogError::Denied(message),
        StatusCode::NOT_FOUND => CatalogError::NotFound(message),
        s if s.is_client_error() => CatalogError::Invalid(message),
        _ => CatalogError::Unavailable(message),
    }
}

fn bad(what: &str) -> CatalogError {
    CatalogError::Unavailable(format!("malformed response: {what}"))
}

fn parse_id(v: &Value) -> Result<ObjectId, CatalogError> {
    v.as_str().and_then(|s| s.parse().ok()).ok_or_else(|| bad("object id"))
}

/// Inverse of the server's JSON envelope for values.
pub fn decode_envelope(v: &Value) -> Result<TagValue, CatalogError> {
    if let Value::Object(map) = v {
        let mime = map.get("mime").and_then(Value::as_str).ok_or_else(|| bad("opaque mime"))?;
        let bytes = map
            .get("base64")
            .and_then(Value::as_str)
            .and_then(|b| STANDARD.decode(b).ok())
            .ok_or_else(|| bad("opaque payload"))?;
        return Ok(TagValue::opaque(mime, bytes));
    }
    classify_value(RawValue::Json(v.clone())).map_err(|e| bad(&e.to_string()))
}

impl Catalog for HttpCatalog {
    fn actor(&self) -> Result<Option<String>, CatalogError> {
        let v = self.json(self.client.get(self.url("/whoami")))?;
        Ok(v.get("username").and_then(Value::as_str).map(str::to_string))
    }

    fn object_for_about(&self, about: &str) -> Result<ObjectId, CatalogError> {
        let v = self.json(self.client.post(self.url("/objects")).json(&json!({ "about": about })))?;
        parse_id(&v["id"])
    }

    fn find_about(&self, about: &str) -> Result<Option<ObjectId>, CatalogError> {
        let url = self.url(&format!("/about/{}", utf8_percent_encode(about, SEGMENT)));
        match self.json(self.client.get(url)) {
            Ok(v) => parse_id(&v["id"]).map(Some),
            Err(CatalogError::NotFound(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn put(&self, id: ObjectId, tag: &TagPath, value: &TagValue) -> Result<(), CatalogError> {
        let builder = self.client.put(self.url(&format!("/objects/{id}/{tag}")));
        let builder = match value {
            TagValue::Opaque(o) => builder.header(CONTENT_TYPE, &o.mime).body(o.bytes.clone()),
            primitive => builder.json(&primitive.to_json().expect("primitive")),
        };
        self.send(builder).map(|_| ())
    }

    fn get(&self, id: ObjectId, tag: &TagPath) -> Result<Option<TagValue>, CatalogError> {
        let response = match self.send(self.client.get(self.url(&format!("/objects/{id}/{tag}")))) {
            Ok(r) => r,
            Err(CatalogError::NotFound(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let kind = response.headers().get(KIND_HEADER).and_then(|v| v.to_str().ok()).unwrap_or_default().to_string();
        let mime = response.headers().get(CONTENT_TYPE).and_then(|v| v.to_str().ok()).map(str::to_string);
        let bytes = response.bytes().map_err(|e| CatalogError::Unavailable(e.to_string()))?;
        if kind == "opaque" {
            return Ok(Some(TagValue::opaque(mime.unwrap_or_else(|| "application/octet-stream".into()), bytes.to_vec())));
        }
        let json: Value = serde_json::from_slice(&bytes).map_err(|_| bad("value body"))?;
        decode_envelope(&json).map(Some)
    }

    fn query(&self, query: &str) -> Result<Vec<ObjectId>, CatalogError> {
        let v = self.json(self.client.get(self.url("/objects")).query(&[("query", query)]))?;
        v["ids"].as_array().ok_or_else(|| bad("ids"))?.iter().map(parse_id).collect()
    }

    fn query_values(&self, query: &str, tags: &[TagPath]) -> Result<Vec<TaggedObject>, CatalogError> {
        if tags.is_empty() {
            return Ok(self.query(query)?.into_iter().map(|id| TaggedObject { id, values: BTreeMap::new() }).collect());
        }
        let joined = tags.iter().map(TagPath::as_str).collect::<Vec<_>>().join(",");
        let v = self.json(self.client.get(self.url("/objects")).query(&[("query", query), ("tags", joined.as_str())]))?;
        let ids = v["ids"].as_array().ok_or_else(|| bad("ids"))?;
        let rows = v["values"].as_object().ok_or_else(|| bad("values"))?;
        ids.iter()
            .map(|raw| {
                let id = parse_id(raw)?;
                let mut values = BTreeMap::new();
                if let Some(Value::Object(row)) = rows.get(&id.to_string()) {
                    for (tag, value) in row {
                        let tag = TagPath::parse(tag).map_err(|_| bad("tag path"))?;
                        values.insert(tag, decode_envelope(value)?);
                    }
                }
                Ok(TaggedObject { id, values })
            })
            .collect()
    }
}
