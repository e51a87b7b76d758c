use std::collections::BTreeMap;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, RawQuery, State};
use axum::http::{HeaderMap, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::Json;
use fluidtag_core::model::{ObjectId, Path, PermissionPolicy, TagPath, TagValue};
use fluidtag_core::{parse_query, Action, Store};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::about::{split_about_path, AboutTarget};
use crate::auth::Actor;
use crate::error::{ApiError, ApiResult};
use crate::wire::{envelope, json_body, parse_value, value_response};
use crate::AppState;

/// Runs a store operation off the async workers; writes may fsync.
async fn blocking<T, F>(state: &AppState, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&Store) -> ApiResult<T> + Send + 'static,
{
    let store = state.store.clone();
    tokio::task::spawn_blocking(move || f(&store))
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

fn object_id(text: &str) -> ApiResult<ObjectId> {
    text.parse().map_err(|_| ApiError::bad_request(format!("{text:?} is not an object id")))
}

fn query_pairs(raw: Option<&str>) -> Vec<(String, String)> {
    form_urlencoded::parse(raw.unwrap_or_default().as_bytes()).into_owned().collect()
}

pub async fn healthz() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

pub async fn whoami(actor: Actor) -> Json<Value> {
    Json(json!({ "username": actor.0 }))
}

#[derive(Deserialize)]
struct NewUser {
    username: String,
    credential: String,
}

pub async fn create_user(State(state): State<AppState>, actor: Actor, body: Bytes) -> ApiResult<Response> {
    let actor = actor.required()?.to_string();
    let new: NewUser = json_body(&body)?;
    let user = blocking(&state, move |s| Ok(s.create_user(&actor, &new.username, &new.credential)?)).await?;
    Ok((StatusCode::CREATED, Json(json!({ "username": user.username, "object": user.object }))).into_response())
}

#[derive(Deserialize, Default)]
struct NewObject {
    about: Option<String>,
}

pub async fn create_object(State(state): State<AppState>, actor: Actor, body: Bytes) -> ApiResult<Response> {
    let actor = actor.required()?.to_string();
    let new: NewObject = if body.iter().all(u8::is_ascii_whitespace) { NewObject::default() } else { json_body(&body)? };
    let (id, created) = blocking(&state, move |s| {
        let existed = new.about.as_deref().and_then(|a| s.object_by_about(a)).is_some();
        Ok((s.create_object(&actor, new.about.as_deref())?, !existed))
    })
    .await?;
    let about = state.store.object(id).and_then(|o| o.about);
    let status = if created { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, Json(json!({ "id": id, "about": about }))).into_response())
}

/// `GET /objects?query=<q>[&tags=<t1,t2>...]`
pub async fn query_objects(State(state): State<AppState>, actor: Actor, RawQuery(raw): RawQuery) -> ApiResult<Json<Value>> {
    let mut query = None;
    let mut tags = Vec::new();
    for (key, value) in query_pairs(raw.as_deref()) {
        match key.as_str() {
            "query" => query = Some(value),
            "tags" => {
                for t in value.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                    tags.push(TagPath::parse(t)?);
                }
            }
            _ => {}
        }
    }
    let query = query.ok_or_else(|| ApiError::bad_request("missing query parameter"))?;
    let parsed = parse_query(&query)?;
    blocking(&state, move |s| {
        let actor = actor.name();
        let ids = s.query(actor, &parsed);
        let mut body = Map::new();
        body.insert("ids".into(), json!(ids));
        if !tags.is_empty() {
            let view = s.read();
            let mut values = Map::new();
            for id in &ids {
                let mut row = Map::new();
                for tag in &tags {
                    if let Some(v) = view.value(*id, tag).filter(|_| view.can_read(tag, actor)) {
                        row.insert(tag.to_string(), envelope(v));
                    }
                }
                values.insert(id.to_string(), Value::Object(row));
            }
            body.insert("values".into(), Value::Object(values));
        }
        Ok(Json(Value::Object(body)))
    })
    .await
}

fn listing(store: &Store, actor: Option<&str>, id: ObjectId) -> ApiResult<Json<Value>> {
    let tags = store.list_object_tags(actor, id)?;
    let about = store.object(id).and_then(|o| o.about);
    let tags: Vec<Value> = tags.iter().map(|(t, k)| json!({ "path": t, "kind": k.as_str() })).collect();
    Ok(Json(json!({ "id": id, "about": about, "tags": tags })))
}

pub async fn object_listing(State(state): State<AppState>, actor: Actor, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    let id = object_id(&id)?;
    blocking(&state, move |s| listing(s, actor.name(), id)).await
}

async fn get_instance(state: &AppState, actor: Actor, id: ObjectId, tag: TagPath) -> ApiResult<Response> {
    let value = blocking(state, move |s| Ok(s.get_tag(actor.name(), id, &tag)?)).await?;
    Ok(value_response(value))
}

async fn put_instance(state: &AppState, actor: Actor, id: ObjectId, tag: TagPath, value: TagValue) -> ApiResult<Response> {
    let actor = actor.required()?.to_string();
    blocking(state, move |s| Ok(s.put_tag(&actor, id, &tag, value)?)).await?;
    Ok(StatusCode::NO_CONTENT.into_response())
}

async fn delete_instance(state: &AppState, actor: Actor, id: ObjectId, tag: TagPath) -> ApiResult<Response> {
    let actor = actor.required()?.to_string();
    blocking(state, move |s| Ok(s.delete_tag(&actor, id, &tag)?)).await?;
    Ok(StatusCode::NO_CONTENT.into_response())
}

fn id_and_tag(id: &str, tag: &str) -> ApiResult<(ObjectId, TagPath)> {
    Ok((object_id(id)?, TagPath::parse(tag)?))
}

pub async fn get_tag(
    State(state): State<AppState>,
    actor: Actor,
    UrlPath((id, tag)): UrlPath<(String, String)>,
) -> ApiResult<Response> {
    let (id, tag) = id_and_tag(&id, &tag)?;
    get_instance(&state, actor, id, tag).await
}

pub async fn put_tag(
    State(state): State<AppState>,
    actor: Actor,
    UrlPath((id, tag)): UrlPath<(String, String)>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<Response> {
    let (id, tag) = id_and_tag(&id, &tag)?;
    let value = parse_value(&headers, body)?;
    put_instance(&state, actor, id, tag, value).await
}

pub async fn delete_tag(
    State(state): State<AppState>,
    actor: Actor,
    UrlPath((id, tag)): UrlPath<(String, String)>,
) -> ApiResult<Response> {
    let (id, tag) = id_and_tag(&id, &tag)?;
    delete_instance(&state, actor, id, tag).await
}

fn about_target(state: &AppState, uri: &Uri) -> ApiResult<AboutTarget> {
    let rest = uri.path().strip_prefix("/about/").unwrap_or_default();
    split_about_path(rest, |name| state.store.user(name).is_some())
}

fn existing_about(state: &AppState, about: &str) -> ApiResult<ObjectId> {
    state
        .store
        .object_by_about(about)
        .ok_or_else(|| ApiError::not_found(format!("no object about {about:?}")))
}

pub async fn get_about(State(state): State<AppState>, actor: Actor, uri: Uri) -> ApiResult<Response> {
    let target = about_target(&state, &uri)?;
    let id = existing_about(&state, &target.about)?;
    match target.tag {
        Some(tag) => get_instance(&state, actor, id, tag).await,
        None => Ok(blocking(&state, move |s| listing(s, actor.name(), id)).await?.into_response()),
    }
}

/// Creates the object on first use, then writes the tag.
pub async fn put_about(
    State(state): State<AppState>,
    actor: Actor,
    uri: Uri,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<Response> {
    let target = about_target(&state, &uri)?;
    let tag = target.tag.ok_or_else(|| ApiError::bad_request("missing tag path after the about-value"))?;
    let value = parse_value(&headers, body)?;
    let writer = actor.required()?.to_string();
    let about = target.about;
    let id = blocking(&state, move |s| Ok(s.create_object(&writer, Some(&about))?)).await?;
    put_instance(&state, actor, id, tag, value).await
}

pub async fn delete_about(State(state): State<AppState>, actor: Actor, uri: Uri) -> ApiResult<Response> {
    let target = about_target(&state, &uri)?;
    let tag = target.tag.ok_or_else(|| ApiError::bad_request("missing tag path after the about-value"))?;
    let id = existing_about(&state, &target.about)?;
    delete_instance(&state, actor, id, tag).await
}

pub async fn create_namespace(State(state): State<AppState>, actor: Actor, UrlPath(path): UrlPath<String>) -> ApiResult<Response> {
    let actor = actor.required()?.to_string();
    let path = Path::parse(&path)?;
    let ns = blocking(&state, move |s| Ok(s.create_namespace(&actor, &path)?)).await?;
    Ok((StatusCode::CREATED, Json(ns)).into_response())
}

pub async fn get_namespace(State(state): State<AppState>, actor: Actor, UrlPath(path): UrlPath<String>) -> ApiResult<Response> {
    let path = Path::parse(&path)?;
    let ns = blocking(&state, move |s| Ok(s.namespace(actor.name(), &path)?)).await?;
    Ok(Json(ns).into_response())
}

fn permission_target(path: &str, raw: Option<&str>) -> ApiResult<(Path, Action)> {
    let path = Path::parse(path)?;
    let pairs: BTreeMap<String, String> = query_pairs(raw).into_iter().collect();
    let action = pairs.get("action").ok_or_else(|| ApiError::bad_request("missing action parameter"))?;
    let action = action.parse::<Action>().map_err(ApiError::bad_request)?;
    Ok((path, action))
}

pub async fn get_permission(
    State(state): State<AppState>,
    actor: Actor,
    UrlPath(path): UrlPath<String>,
    RawQuery(raw): RawQuery,
) -> ApiResult<Response> {
    let actor = actor.required()?.to_string();
    let (path, action) = permission_target(&path, raw.as_deref())?;
    let policy = blocking(&state, move |s| Ok(s.get_permission(&actor, &path, action)?)).await?;
    Ok(Json(policy).into_response())
}

pub async fn put_permission(
    State(state): State<AppState>,
    actor: Actor,
    UrlPath(path): UrlPath<String>,
    RawQuery(raw): RawQuery,
    body: Bytes,
) -> ApiResult<Response> {
    let actor = actor.required()?.to_string();
    let (path, action) = permission_target(&path, raw.as_deref())?;
    let policy: PermissionPolicy = json_body(&body)?;
    blocking(&state, move |s| Ok(s.set_permission(&actor, &path, action, policy)?)).await?;
    Ok(StatusCode::NO_CONTENT.into_response())
}

pub async fn fallback() -> ApiError {
    ApiError::not_found("no such route")
}
