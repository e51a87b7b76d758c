//! Persistent, permission-enforcing tag store.
//!
//! State lives in memory and every mutation is appended to a checksummed
//! log before it is applied, so a reopened store replays to exactly the
//! acknowledged writes. Indexes are derived from the instance table and can
//! be rebuilt at any time ([`Store::reindex`]). Readers share a lock; writers
//! are serialized, so no reader ever sees an instance without its index
//! entries.
//!
//! Reads that the caller is not permitted to make are reported as
//! [`StoreError::NotFound`], indistinguishable from a missing instance.
//! Denied writes report [`StoreError::PermissionDenied`].

mod index;
mod log;
mod state;

use std::collections::BTreeSet;
use std::fs::{self, File, OpenOptions};
use std::io;
use std::path::{Path as FsPath, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use parking_lot::{RwLock, RwLockReadGuard};
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use index::{IdSet, TagIndex};
use log::Log;
use state::{NodeEntry, Record, State};

use crate::model::{
    valid_username, Action, Namespace, Object, ObjectId, Path, PathError, PermissionPolicy,
    TagPath, TagValue, TargetKind, ValueKind, ABOUT_TAG, ADMIN_USER, SYSTEM_USER, USERNAME_TAG,
};

const LAYOUT_FILE: &str = "FORMAT";
const LAYOUT_MARKER: &str = "fluidtag-store 1";
const LOG_FILE: &str = "store.log";
const LOCK_FILE: &str = "LOCK";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("authentication required")]
    Unauthenticated,
    #[error("permission denied: {0}")]
    PermissionDenied(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("already exists: {0}")]
    Duplicate(String),
    #[error("{0} is immutable")]
    Immutable(String),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error("invalid request: {0}")]
    Invalid(String),
    #[error("store directory {0} is locked by another process")]
    Locked(PathBuf),
    #[error("store is corrupt: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = StoreError> = std::result::Result<T, E>;

#[derive(Debug, Clone)]
pub struct StoreOptions {
    /// fsync the log after every acknowledged write.
    pub sync: bool,
}

impl Default for StoreOptions {
    fn default() -> Self {
        StoreOptions { sync: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TagInstance {
    pub object: ObjectId,
    pub tag: TagPath,
    pub value: TagValue,
    /// Seconds since the Unix epoch. Diagnostic only.
    pub updated_at: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub objects: usize,
    pub instances: usize,
    pub index_entries: usize,
    pub problems: Vec<String>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.problems.is_empty()
    }
}

struct Inner {
    state: State,
    log: Log,
}

pub struct Store {
    dir: PathBuf,
    inner: RwLock<Inner>,
    _lock: File,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or_default()
}

fn hash_credential(token: &str) -> String {
    hex::encode(Sha256::digest(token.as_bytes()))
}

fn reserved(tag: &str) -> TagPath {
    TagPath::parse(tag).expect("reserved tag path")
}

fn not_found(object: ObjectId, tag: &TagPath) -> StoreError {
    StoreError::NotFound(format!("no instance of {tag} on {object}"))
}

fn bootstrap_records() -> Vec<Record> {
    let at = now();
    vec![
        Record::User {
            username: SYSTEM_USER.into(),
            credential: None,
            object: ObjectId::new_random(),
            at,
        },
        Record::Namespace { path: Path::parse("fluiddb/users").unwrap(), owner: SYSTEM_USER.into() },
        Record::Tag { path: reserved(ABOUT_TAG), owner: SYSTEM_USER.into() },
        Record::Tag { path: reserved(USERNAME_TAG), owner: SYSTEM_USER.into() },
        Record::User {
            username: ADMIN_USER.into(),
            credential: None,
            object: ObjectId::new_random(),
            at,
        },
    ]
}

impl Store {
    /// Opens the store in `dir`, creating an empty one if the directory is
    /// missing or empty. Fails with [`StoreError::Locked`] while another
    /// handle (in any process) holds the directory.
    pub fn open(dir: impl AsRef<FsPath>, options: StoreOptions) -> Result<Store> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        let lock = OpenOptions::new().create(true).truncate(false).write(true).open(dir.join(LOCK_FILE))?;
        match lock.try_lock() {
            Ok(()) => {}
            Err(fs::TryLockError::WouldBlock) => return Err(StoreError::Locked(dir)),
            Err(fs::TryLockError::Error(e)) => return Err(e.into()),
        }

        let marker = dir.join(LAYOUT_FILE);
        let log_path = dir.join(LOG_FILE);
        match fs::read_to_string(&marker) {
            Ok(text) if text.trim() == LAYOUT_MARKER => {}
            Ok(text) => {
                return Err(StoreError::Corrupt(format!("unsupported layout {:?}", text.trim())))
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                if fs::metadata(&log_path).is_ok_and(|m| m.len() > 0) {
                    return Err(StoreError::Corrupt("log present without layout marker".into()));
                }
                fs::write(&marker, format!("{LAYOUT_MARKER}\n"))?;
            }
            Err(e) => return Err(e.into()),
        }

        let (mut log, records) = Log::open(&log_path, options.sync)?;
        let mut state = State::default();
        if records.is_empty() {
            let boot = bootstrap_records();
            log.append(&boot)?;
            for r in boot {
                state.apply(r);
            }
        } else {
            for r in records {
                state.apply(r);
            }
        }
        Ok(Store { dir, inner: RwLock::new(Inner { state, log }), _lock: lock })
    }

    pub fn dir(&self) -> &FsPath {
        &self.dir
    }

    /// Read-only snapshot for query evaluation. Writers wait until it is
    /// dropped.
    pub fn read(&self) -> StoreView<'_> {
        StoreView { inner: self.inner.read() }
    }

    fn commit(inner: &mut Inner, records: Vec<Record>) -> Result<()> {
        inner.log.append(&records)?;
        for r in records {
            inner.state.apply(r);
        }
        Ok(())
    }

    /// Username owning `token`, if any.
    pub fn authenticate(&self, token: &str) -> Option<String> {
        let hashed = hash_credential(token);
        let inner = self.inner.read();
        inner
            .state
            .users
            .iter()
            .find(|(_, u)| u.credential.as_deref() == Some(hashed.as_str()))
            .map(|(name, _)| name.clone())
    }

    pub fn create_user(&self, actor: &str, username: &str, credential: &str) -> Result<crate::model::User> {
        let mut inner = self.inner.write();
        require_user(&inner.state, actor)?;
        if actor != ADMIN_USER {
            return Err(StoreError::PermissionDenied(format!("{actor} may not create users")));
        }
        Self::insert_user(&mut inner, username, credential)
    }

    fn insert_user(inner: &mut Inner, username: &str, credential: &str) -> Result<crate::model::User> {
        if !valid_username(username) {
            return Err(StoreError::Invalid(format!("invalid username {username:?}")));
        }
        let ns = Path::parse(username)?;
        if inner.state.users.contains_key(username) || inner.state.namespaces.contains_key(&ns) {
            return Err(StoreError::Duplicate(format!("user {username}")));
        }
        let object = ObjectId::new_random();
        let record = Record::User {
            username: username.to_string(),
            credential: Some(hash_credential(credential)),
            object,
            at: now(),
        };
        Self::commit(inner, vec![record])?;
        Ok(crate::model::User { username: username.to_string(), object })
    }

    /// Makes sure `username` exists and logs in with `credential`. Used to
    /// load a credential file at startup; not an actor-checked operation.
    pub fn provision_user(&self, username: &str, credential: &str) -> Result<()> {
        let mut inner = self.inner.write();
        let hashed = hash_credential(credential);
        match inner.state.users.get(username) {
            Some(user) if user.credential.as_deref() == Some(hashed.as_str()) => Ok(()),
            Some(_) if username == SYSTEM_USER => {
                Err(StoreError::Invalid(format!("{SYSTEM_USER} cannot log in")))
            }
            Some(_) => Self::commit(
                &mut inner,
                vec![Record::Credential { username: username.into(), credential: hashed }],
            ),
            None => Self::insert_user(&mut inner, username, credential).map(|_| ()),
        }
    }

    pub fn user(&self, username: &str) -> Option<crate::model::User> {
        let inner = self.inner.read();
        inner
            .state
            .users
            .get(username)
            .map(|u| crate::model::User { username: username.to_string(), object: u.object })
    }

    /// Returns the object carrying `about`, creating it first if needed.
    /// Without an about-value a fresh anonymous object is created every time.
    pub fn create_object(&self, actor: &str, about: Option<&str>) -> Result<ObjectId> {
        if about.is_some_and(str::is_empty) {
            return Err(StoreError::Invalid("about-value must not be empty".into()));
        }
        if let Some(id) = about.and_then(|a| self.object_by_about(a)) {
            require_user(&self.inner.read().state, actor)?;
            return Ok(id);
        }
        let mut inner = self.inner.write();
        require_user(&inner.state, actor)?;
        // Another writer may have won the race since the read above.
        if let Some(id) = about.and_then(|a| inner.state.abouts.get(a).copied()) {
            return Ok(id);
        }
        let id = ObjectId::new_random();
        let record = Record::Object { id, about: about.map(str::to_string), at: now() };
        Self::commit(&mut inner, vec![record])?;
        Ok(id)
    }

    pub fn object(&self, id: ObjectId) -> Option<Object> {
        let inner = self.inner.read();
        inner.state.objects.get(&id).map(|about| Object { id, about: about.clone() })
    }

    pub fn object_by_about(&self, about: &str) -> Option<ObjectId> {
        self.inner.read().state.abouts.get(about).copied()
    }

    /// Creates or overwrites the instance of `tag` on `object`.
    ///
    /// A first write to an unknown tag defines it, owned by `actor`; missing
    /// namespaces are created along the way, but only inside the actor's own
    /// top-level namespace.
    pub fn put_tag(&self, actor: &str, object: ObjectId, tag: &TagPath, value: TagValue) -> Result<TagInstance> {
        if tag.as_str() == ABOUT_TAG {
            return Err(StoreError::Immutable(ABOUT_TAG.into()));
        }
        if let TagValue::Float(f) = value {
            if !f.is_finite() {
                return Err(StoreError::Invalid("floats must be finite".into()));
            }
        }
        let mut inner = self.inner.write();
        let state = &inner.state;
        require_user(state, actor)?;
        if !state.objects.contains_key(&object) {
            return Err(StoreError::NotFound(format!("object {object}")));
        }
        let mut records = Vec::new();
        let exists = state.instances.get(&object).is_some_and(|t| t.contains_key(tag));
        let action = if exists { Action::Update } else { Action::Create };
        match state.tags.get(tag) {
            Some(node) => {
                if !node.policy(action).admits(Some(actor)) {
                    return Err(StoreError::PermissionDenied(format!("{actor} may not {action} {tag}")));
                }
            }
            None => {
                define_tag(state, actor, tag, &mut records)?;
            }
        }
        let at = now();
        records.push(Record::Put { object, tag: tag.clone(), value: value.clone(), at });
        Self::commit(&mut inner, records)?;
        Ok(TagInstance { object, tag: tag.clone(), value, updated_at: at })
    }

    pub fn get_tag(&self, actor: Option<&str>, object: ObjectId, tag: &TagPath) -> Result<TagValue> {
        let inner = self.inner.read();
        if let Some(actor) = actor {
            require_user(&inner.state, actor)?;
        }
        let view = StoreView { inner };
        if !view.can_read(tag, actor) {
            return Err(not_found(object, tag));
        }
        view.value(object, tag).cloned().ok_or_else(|| not_found(object, tag))
    }

    pub fn delete_tag(&self, actor: &str, object: ObjectId, tag: &TagPath) -> Result<()> {
        if tag.as_str() == ABOUT_TAG {
            return Err(StoreError::Immutable(ABOUT_TAG.into()));
        }
        let mut inner = self.inner.write();
        let state = &inner.state;
        require_user(state, actor)?;
        let exists = state.instances.get(&object).is_some_and(|t| t.contains_key(tag));
        let node = state.tags.get(tag);
        let Some(node) = node.filter(|_| exists) else {
            return Err(not_found(object, tag));
        };
        if !node.policy(Action::Delete).admits(Some(actor)) {
            return Err(StoreError::PermissionDenied(format!("{actor} may not delete {tag}")));
        }
        Self::commit(&mut inner, vec![Record::Delete { object, tag: tag.clone() }])
    }

    pub fn create_namespace(&self, actor: &str, path: &Path) -> Result<Namespace> {
        let mut inner = self.inner.write();
        let state = &inner.state;
        require_user(state, actor)?;
        let Some(parent) = path.parent() else {
            return Err(StoreError::Invalid("top-level namespaces belong to users".into()));
        };
        let Some(parent_node) = state.namespaces.get(&parent) else {
            return Err(StoreError::NotFound(format!("namespace {parent}")));
        };
        if !parent_node.policy(Action::Create).admits(Some(actor)) {
            return Err(StoreError::PermissionDenied(format!("{actor} may not create in {parent}")));
        }
        if state.namespaces.contains_key(path) || is_tag(state, path) {
            return Err(StoreError::Duplicate(format!("{path}")));
        }
        Self::commit(&mut inner, vec![Record::Namespace { path: path.clone(), owner: actor.into() }])?;
        Ok(Namespace { path: path.clone(), owner: actor.into(), namespaces: vec![], tags: vec![] })
    }

    /// Namespace with its direct children. Requires `list` permission;
    /// refusal reads as not-found.
    pub fn namespace(&self, actor: Option<&str>, path: &Path) -> Result<Namespace> {
        let inner = self.inner.read();
        let state = &inner.state;
        if let Some(actor) = actor {
            require_user(state, actor)?;
        }
        let node = state
            .namespaces
            .get(path)
            .filter(|n| n.policy(Action::List).admits(actor))
            .ok_or_else(|| StoreError::NotFound(format!("namespace {path}")))?;
        let prefix = format!("{path}/");
        let direct = |p: &str| p.strip_prefix(&prefix).filter(|rest| !rest.contains('/')).map(str::to_string);
        Ok(Namespace {
            path: path.clone(),
            owner: node.owner.clone(),
            namespaces: state.namespaces.keys().filter_map(|p| direct(p.as_str())).collect(),
            tags: state.tags.keys().filter_map(|p| direct(p.as_str())).collect(),
        })
    }

    pub fn set_permission(&self, actor: &str, path: &Path, action: Action, policy: PermissionPolicy) -> Result<()> {
        let mut inner = self.inner.write();
        require_user(&inner.state, actor)?;
        let (kind, node) = target(&inner.state, path)?;
        check_control(kind, node, actor, path, action)?;
        let record = Record::Policy { path: path.clone(), action, policy };
        Self::commit(&mut inner, vec![record])
    }

    pub fn get_permission(&self, actor: &str, path: &Path, action: Action) -> Result<PermissionPolicy> {
        let inner = self.inner.read();
        require_user(&inner.state, actor)?;
        let (kind, node) = target(&inner.state, path)?;
        check_control(kind, node, actor, path, action)?;
        Ok(node.policy(action).clone())
    }

    /// Owner of a tag or namespace.
    pub fn owner(&self, path: &Path) -> Option<String> {
        let inner = self.inner.read();
        target(&inner.state, path).ok().map(|(_, n)| n.owner.clone())
    }

    /// Tags on `object` that `actor` may read, in path order.
    pub fn list_object_tags(&self, actor: Option<&str>, object: ObjectId) -> Result<Vec<(TagPath, ValueKind)>> {
        let view = self.read();
        if let Some(actor) = actor {
            require_user(&view.inner.state, actor)?;
        }
        if !view.inner.state.objects.contains_key(&object) {
            return Err(StoreError::NotFound(format!("object {object}")));
        }
        Ok(view
            .instances(object)
            .filter(|(tag, _)| view.can_read(tag, actor))
            .map(|(tag, value)| (tag.clone(), value.kind()))
            .collect())
    }

    /// Checks index consistency, about uniqueness and referential integrity
    /// by a full scan.
    pub fn audit(&self) -> AuditReport {
        let inner = self.inner.read();
        audit_state(&inner.state)
    }

    /// Rebuilds every index from the instance table and compacts the log to
    /// a snapshot of the current state.
    pub fn reindex(&self) -> Result<AuditReport> {
        let mut inner = self.inner.write();
        inner.state.index = inner.state.rebuilt_index();
        let snapshot = inner.state.snapshot();
        inner.log.rewrite(&snapshot)?;
        Ok(audit_state(&inner.state))
    }

    /// Forces the log to stable storage.
    pub fn flush(&self) -> Result<()> {
        self.inner.write().log.sync()?;
        Ok(())
    }
}

fn require_user(state: &State, actor: &str) -> Result<()> {
    if state.users.contains_key(actor) {
        Ok(())
    } else {
        Err(StoreError::Unauthenticated)
    }
}

fn is_tag(state: &State, path: &Path) -> bool {
    TagPath::parse(path.as_str()).is_ok_and(|t| state.tags.contains_key(&t))
}

fn target<'a>(state: &'a State, path: &Path) -> Result<(TargetKind, &'a NodeEntry)> {
    if let Ok(tag) = TagPath::parse(path.as_str()) {
        if let Some(node) = state.tags.get(&tag) {
            return Ok((TargetKind::Tag, node));
        }
    }
    state
        .namespaces
        .get(path)
        .map(|n| (TargetKind::Namespace, n))
        .ok_or_else(|| StoreError::NotFound(format!("{path}")))
}

fn check_control(kind: TargetKind, node: &NodeEntry, actor: &str, path: &Path, action: Action) -> Result<()> {
    if !action.applies_to(kind) {
        let kind = match kind {
            TargetKind::Tag => "tags",
            TargetKind::Namespace => "namespaces",
        };
        return Err(StoreError::Invalid(format!("action {action} does not apply to {kind}")));
    }
    if node.owner != actor {
        return Err(StoreError::PermissionDenied(format!("{actor} does not control {path}")));
    }
    Ok(())
}

/// Records defining `tag` for `actor`, including any missing namespaces.
fn define_tag(state: &State, actor: &str, tag: &TagPath, records: &mut Vec<Record>) -> Result<()> {
    if state.namespaces.contains_key(tag.as_path()) {
        return Err(StoreError::Duplicate(format!("{tag} is a namespace")));
    }
    let mut created: BTreeSet<Path> = BTreeSet::new();
    for ns in tag.as_path().ancestors() {
        if is_tag(state, &ns) {
            return Err(StoreError::Duplicate(format!("{ns} is a tag")));
        }
        if state.namespaces.contains_key(&ns) {
            continue;
        }
        if ns.root() != actor {
            return Err(StoreError::NotFound(format!("namespace {ns}")));
        }
        let parent = ns.parent().expect("top-level namespaces always exist for users");
        let allowed = created.contains(&parent)
            || state.namespaces.get(&parent).is_some_and(|n| n.policy(Action::Create).admits(Some(actor)));
        if !allowed {
            return Err(StoreError::PermissionDenied(format!("{actor} may not create in {parent}")));
        }
        records.push(Record::Namespace { path: ns.clone(), owner: actor.into() });
        created.insert(ns);
    }
    let parent = tag.namespace();
    let allowed = created.contains(&parent)
        || state.namespaces.get(&parent).is_some_and(|n| n.policy(Action::Create).admits(Some(actor)));
    if !allowed {
        return Err(StoreError::PermissionDenied(format!("{actor} may not create tags in {parent}")));
    }
    records.push(Record::Tag { path: tag.clone(), owner: actor.into() });
    Ok(())
}

fn audit_state(state: &State) -> AuditReport {
    let mut problems = Vec::new();
    if state.rebuilt_index() != state.index {
        problems.push("live index differs from index rebuilt from instances".to_string());
    }
    let mut seen = std::collections::HashMap::new();
    for (id, about) in &state.objects {
        if let Some(about) = about {
            if let Some(other) = seen.insert(about.clone(), *id) {
                problems.push(format!("about {about:?} on both {other} and {id}"));
            }
            if state.abouts.get(about) != Some(id) {
                problems.push(format!("about map out of date for {about:?}"));
            }
        }
    }
    if state.abouts.len() != seen.len() {
        problems.push("about map has entries for unknown objects".to_string());
    }
    let mut instances = 0;
    for (id, tags) in &state.instances {
        if !state.objects.contains_key(id) {
            problems.push(format!("instances on unknown object {id}"));
        }
        for tag in tags.keys() {
            instances += 1;
            if !state.tags.contains_key(tag) {
                problems.push(format!("instance of undefined tag {tag} on {id}"));
            }
        }
    }
    for tag in state.tags.keys() {
        if !tag.as_path().ancestors().iter().all(|ns| state.namespaces.contains_key(ns)) {
            problems.push(format!("tag {tag} has a missing namespace"));
        }
    }
    AuditReport {
        objects: state.objects.len(),
        instances,
        index_entries: state.index.entries(),
        problems,
    }
}

/// Shared-lock view of the store used by query evaluation.
pub struct StoreView<'a> {
    inner: RwLockReadGuard<'a, Inner>,
}

impl StoreView<'_> {
    /// Whether `actor` (or an anonymous caller) may see instances of `tag`.
    /// Unknown tags are not readable.
    pub fn can_read(&self, tag: &TagPath, actor: Option<&str>) -> bool {
        self.inner
            .state
            .tags
            .get(tag)
            .is_some_and(|n| n.policy(Action::Read).admits(actor))
    }

    pub fn index(&self, tag: &TagPath) -> Option<&TagIndex> {
        self.inner.state.index.tag(tag)
    }

    pub fn value(&self, object: ObjectId, tag: &TagPath) -> Option<&TagValue> {
        self.inner.state.instances.get(&object)?.get(tag).map(|i| &i.value)
    }

    pub fn objects(&self) -> impl Iterator<Item = ObjectId> + '_ {
        self.inner.state.objects.keys().copied()
    }

    pub fn instances(&self, object: ObjectId) -> impl Iterator<Item = (&TagPath, &TagValue)> + '_ {
        self.inner
            .state
            .instances
            .get(&object)
            .into_iter()
            .flat_map(|tags| tags.iter().map(|(t, i)| (t, &i.value)))
    }

    pub fn about(&self, object: ObjectId) -> Option<&str> {
        self.inner.state.objects.get(&object)?.as_deref()
    }
}
