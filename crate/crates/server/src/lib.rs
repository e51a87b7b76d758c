//! HTTP service over a fluidtag [`Store`].
//!
//! | route | operation |
//! |---|---|
//! | `GET /healthz` | liveness |
//! | `GET /whoami` | authenticated username or null |
//! | `POST /users` | create user (admin only) |
//! | `POST /objects` | create object, idempotent by about |
//! | `GET /objects?query=&tags=` | query, optionally with tag values |
//! | `GET /objects/{id}` | readable tags on an object |
//! | `GET\|PUT\|DELETE /objects/{id}/{tag}` | one tag instance |
//! | `GET\|PUT\|DELETE /about/{about}/{tag}` | same, addressed by about-value |
//! | `GET /about/{about}` | readable tags on the object |
//! | `GET\|POST /namespaces/{path}` | read or create a namespace |
//! | `GET\|PUT /permissions/{path}?action=` | read or set a policy |
//!
//! Callers authenticate with `Authorization: Bearer <token>`. Errors are
//! `{"error", "message"}` with 401, 403, 404, 400, 409 or 412.

mod about;
pub mod auth;
pub mod error;
mod routes;
pub mod wire;

use std::future::Future;
use std::io;
use std::path::PathBuf;
use std::sync::Arc;

use axum::routing::{get, post};
use axum::Router;
use fluidtag_core::{Store, StoreError, StoreOptions};
use thiserror::Error;
use tokio::net::TcpListener;

pub use about::{split_about_path, AboutTarget};

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<Store>,
}

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/healthz", get(routes::healthz))
        .route("/whoami", get(routes::whoami))
        .route("/users", post(routes::create_user))
        .route("/objects", post(routes::create_object).get(routes::query_objects))
        .route("/objects/{id}", get(routes::object_listing))
        .route("/objects/{id}/{*tag}", get(routes::get_tag).put(routes::put_tag).delete(routes::delete_tag))
        .route("/about/{*rest}", get(routes::get_about).put(routes::put_about).delete(routes::delete_about))
        .route("/namespaces/{*path}", get(routes::get_namespace).post(routes::create_namespace))
        .route("/permissions/{*path}", get(routes::get_permission).put(routes::put_permission))
        .fallback(routes::fallback)
        .with_state(AppState { store })
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("cannot read credential file {path}: {source}")]
    CredentialsIo { path: PathBuf, source: io::Error },
    #[error("credential file {path}: {message}")]
    Credentials { path: PathBuf, message: String },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: String, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub bind: String,
    pub store: PathBuf,
    pub credentials: Option<PathBuf>,
    pub sync: bool,
}

/// Opens (or creates) the store and loads the credential file into it.
pub fn open_store(config: &ServerConfig) -> Result<Arc<Store>, ServeError> {
    let credentials = match &config.credentials {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|source| ServeError::CredentialsIo { path: path.clone(), source })?;
            auth::parse_credentials(&text).map_err(|message| ServeError::Credentials { path: path.clone(), message })?
        }
        None => Default::default(),
    };
    let store = Store::open(&config.store, StoreOptions { sync: config.sync })?;
    for (user, token) in &credentials {
        store.provision_user(user, token)?;
    }
    Ok(Arc::new(store))
}

pub async fn bind(addr: &str) -> Result<TcpListener, ServeError> {
    TcpListener::bind(addr).await.map_err(|source| ServeError::Bind { addr: addr.to_string(), source })
}

/// Serves until `shutdown` resolves, then drains requests and flushes the
/// store.
pub async fn serve(listener: TcpListener, store: Arc<Store>, shutdown: impl Future<Output = ()> + Send + 'static) -> Result<(), ServeError> {
    axum::serve(listener, router(store.clone())).with_graceful_shutdown(shutdown).await?;
    store.flush()?;
    Ok(())
}
