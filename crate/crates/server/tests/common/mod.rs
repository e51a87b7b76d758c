#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::thread::JoinHandle;

use fluidtag_core::{Store, StoreOptions};
use reqwest::blocking::{Client, RequestBuilder, Response};
use tokio::sync::oneshot;

pub const USERS: [&str; 6] = ["admin", "alice", "bob", "carol", "einsteintoolkit.org", "cactuscode.org"];

pub fn token(user: &str) -> String {
    format!("{user}-token")
}

/// An in-process server on an ephemeral port, stopped on drop.
pub struct TestServer {
    pub url: String,
    pub store: Arc<Store>,
    pub dir: PathBuf,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
    _tmp: Option<tempfile::TempDir>,
    client: Client,
}

pub fn open_store(dir: &std::path::Path) -> Arc<Store> {
    let store = Store::open(dir, StoreOptions { sync: false }).unwrap();
    for user in USERS {
        store.provision_user(user, &token(user)).unwrap();
    }
    Arc::new(store)
}

impl TestServer {
    pub fn start() -> TestServer {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("store");
        let mut server = TestServer::with_store(open_store(&dir), dir);
        server._tmp = Some(tmp);
        server
    }

    pub fn with_store(store: Arc<Store>, dir: PathBuf) -> TestServer {
        let (tx, rx) = oneshot::channel::<()>();
        let (addr_tx, addr_rx) = std::sync::mpsc::channel::<SocketAddr>();
        let served = store.clone();
        let thread = std::thread::spawn(move || {
            let runtime = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build().unwrap();
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
                addr_tx.send(listener.local_addr().unwrap()).unwrap();
                fluidtag_server::serve(listener, served, async {
                    let _ = rx.await;
                })
                .await
                .unwrap();
            });
        });
        let addr = addr_rx.recv().unwrap();
        TestServer {
            url: format!("http://{addr}"),
            store,
            dir,
            shutdown: Some(tx),
            thread: Some(thread),
            _tmp: None,
            client: Client::new(),
        }
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{path}", self.url)
    }

    fn auth(&self, builder: RequestBuilder, user: Option<&str>) -> RequestBuilder {
        match user {
            Some(u) => builder.bearer_auth(token(u)),
            None => builder,
        }
    }

    pub fn get(&self, user: Option<&str>, path: &str) -> Response {
        self.auth(self.client.get(self.url(path)), user).send().unwrap()
    }

    pub fn delete(&self, user: Option<&str>, path: &str) -> Response {
        self.auth(self.client.delete(self.url(path)), user).send().unwrap()
    }

    pub fn put_json(&self, user: Option<&str>, path: &str, body: &serde_json::Value) -> Response {
        self.auth(self.client.put(self.url(path)), user).json(body).send().unwrap()
    }

    pub fn put_bytes(&self, user: Option<&str>, path: &str, mime: Option<&str>, body: Vec<u8>) -> Response {
        let mut b = self.auth(self.client.put(self.url(path)), user).body(body);
        if let Some(m) = mime {
            b = b.header("content-type", m);
        }
        b.send().unwrap()
    }

    pub fn post_json(&self, user: Option<&str>, path: &str, body: &serde_json::Value) -> Response {
        self.auth(self.client.post(self.url(path)), user).json(body).send().unwrap()
    }

    pub fn post_empty(&self, user: Option<&str>, path: &str) -> Response {
        self.auth(self.client.post(self.url(path)), user).send().unwrap()
    }

    pub fn catalog(&self, user: Option<&str>) -> fluidtag_cli::HttpCatalog {
        fluidtag_cli::HttpCatalog::new(&self.url, user.map(token).as_deref()).unwrap()
    }

    pub fn stop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            t.join().unwrap();
        }
    }
}

impl Drop for TestServer {
    fn drop(&mut self) {
        self.stop();
    }
}

pub fn core_fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

/// A `fluidtagd serve` child process on an ephemeral port.
pub struct Daemon {
    pub child: std::process::Child,
    pub url: String,
}

pub fn write_credentials(path: &std::path::Path) {
    let text: String = USERS.iter().map(|u| format!("{u} {}\n", token(u))).collect();
    std::fs::write(path, format!("# test users\n{text}")).unwrap();
}

/// Starts the daemon and waits for its `listening on` line. Returns the
/// child and its stderr when the daemon exits before listening.
pub fn spawn_daemon(store: &std::path::Path, credentials: &std::path::Path, extra: &[&str]) -> Result<Daemon, String> {
    use std::io::{BufRead, BufReader, Read};
    use std::process::{Command, Stdio};
    let mut child = Command::new(env!("CARGO_BIN_EXE_fluidtagd"))
        .arg("serve")
        .args(["--bind", "127.0.0.1:0", "--store"])
        .arg(store)
        .arg("--credentials")
        .arg(credentials)
        .args(extra)
        .env("RUST_LOG", "warn")
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    match line.trim().strip_prefix("listening on ") {
        Some(addr) => Ok(Daemon { url: format!("http://{addr}"), child }),
        None => {
            let mut err = String::new();
            child.stderr.take().unwrap().read_to_string(&mut err).unwrap();
            child.wait().unwrap();
            Err(err)
        }
    }
}

impl Drop for Daemon {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
