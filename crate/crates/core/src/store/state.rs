//! In-memory state rebuilt by replaying the log, and the log records that
//! mutate it.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::index::Index;
use crate::model::{
    Action, ObjectId, Path, PermissionPolicy, TagPath, TagValue, TargetKind, ABOUT_TAG,
    USERNAME_TAG,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Record {
    /// Also creates the user's top-level namespace and tags the user object.
    User { username: String, credential: Option<String>, object: ObjectId, at: u64 },
    Credential { username: String, credential: String },
    Namespace { path: Path, owner: String },
    Tag { path: TagPath, owner: String },
    Policy { path: Path, action: Action, policy: PermissionPolicy },
    /// Also stores the about-value as a `fluiddb/about` instance.
    Object { id: ObjectId, about: Option<String>, at: u64 },
    Put { object: ObjectId, tag: TagPath, value: TagValue, at: u64 },
    Delete { object: ObjectId, tag: TagPath },
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserEntry {
    /// Hex SHA-256 of the bearer token, if the user can log in.
    pub credential: Option<String>,
    pub object: ObjectId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeEntry {
    pub owner: String,
    pub policies: BTreeMap<Action, PermissionPolicy>,
}

impl NodeEntry {
    fn new(kind: TargetKind, owner: &str) -> Self {
        let owner_only = || PermissionPolicy::closed_except([owner]);
        let policies = match kind {
            TargetKind::Namespace => BTreeMap::from([
                (Action::Create, owner_only()),
                (Action::List, PermissionPolicy::open()),
            ]),
            TargetKind::Tag => BTreeMap::from([
                (Action::Create, owner_only()),
                (Action::Read, PermissionPolicy::open()),
                (Action::Update, owner_only()),
                (Action::Delete, owner_only()),
            ]),
        };
        NodeEntry { owner: owner.to_string(), policies }
    }

    pub fn policy(&self, action: Action) -> &PermissionPolicy {
        // Every applicable action is seeded at creation.
        &self.policies[&action]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub value: TagValue,
    pub updated_at: u64,
}

#[derive(Debug, Default)]
pub struct State {
    pub users: BTreeMap<String, UserEntry>,
    pub namespaces: BTreeMap<Path, NodeEntry>,
    pub tags: BTreeMap<TagPath, NodeEntry>,
    pub objects: BTreeMap<ObjectId, Option<String>>,
    pub abouts: HashMap<String, ObjectId>,
    pub instances: BTreeMap<ObjectId, BTreeMap<TagPath, Instance>>,
    pub index: Index,
}

fn about_tag() -> TagPath {
    TagPath::parse(ABOUT_TAG).expect("reserved tag path")
}

fn username_tag() -> TagPath {
    TagPath::parse(USERNAME_TAG).expect("reserved tag path")
}

impl State {
    /// Applies a record that has already been validated (live) or was
    /// validated before it was logged (replay).
    pub fn apply(&mut self, record: Record) {
        match record {
            Record::User { username, credential, object, at } => {
                let ns = Path::parse(&username).expect("usernames are valid segments");
                self.namespaces.insert(ns, NodeEntry::new(TargetKind::Namespace, &username));
                self.objects.insert(object, None);
                self.put(object, username_tag(), TagValue::String(username.clone()), at);
                self.users.insert(username, UserEntry { credential, object });
            }
            Record::Credential { username, credential } => {
                if let Some(user) = self.users.get_mut(&username) {
                    user.credential = Some(credential);
                }
            }
            Record::Namespace { path, owner } => {
                self.namespaces.insert(path, NodeEntry::new(TargetKind::Namespace, &owner));
            }
            Record::Tag { path, owner } => {
                self.tags.insert(path, NodeEntry::new(TargetKind::Tag, &owner));
            }
            Record::Policy { path, action, policy } => {
                let node = match TagPath::parse(path.as_str()) {
                    Ok(tag) if self.tags.contains_key(&tag) => self.tags.get_mut(&tag),
                    _ => self.namespaces.get_mut(&path),
                };
                if let Some(node) = node {
                    node.policies.insert(action, policy);
                }
            }
            Record::Object { id, about, at } => {
                if let Some(about) = &about {
                    self.abouts.insert(about.clone(), id);
                    self.put(id, about_tag(), TagValue::String(about.clone()), at);
                }
                self.objects.insert(id, about);
            }
            Record::Put { object, tag, value, at } => self.put(object, tag, value, at),
            Record::Delete { object, tag } => {
                let removed = self.instances.get_mut(&object).and_then(|tags| tags.remove(&tag));
                if let Some(old) = removed {
                    self.index.remove(object, &tag, &old.value);
                }
            }
        }
    }

    fn put(&mut self, object: ObjectId, tag: TagPath, value: TagValue, at: u64) {
        self.index.insert(object, &tag, &value);
        let slot = self.instances.entry(object).or_default();
        let old = slot.insert(tag.clone(), Instance { value, updated_at: at });
        if let Some(old) = old {
            // Re-insert after removal so shared keys (e.g. the same token in
            // old and new strings) survive.
            self.index.remove(object, &tag, &old.value);
            let current = &slot[&tag].value;
            self.index.insert(object, &tag, current);
        }
    }

    /// Index built from scratch out of the instance table.
    pub fn rebuilt_index(&self) -> Index {
        let mut index = Index::default();
        for (id, tags) in &self.instances {
            for (tag, inst) in tags {
                index.insert(*id, tag, &inst.value);
            }
        }
        index
    }

    /// Records that recreate this state when replayed into an empty store.
    pub fn snapshot(&self) -> Vec<Record> {
        let mut out = Vec::new();
        let user_tag = username_tag();
        let about = about_tag();
        for (path, node) in &self.namespaces {
            if path.depth() > 1 || !self.users.contains_key(path.as_str()) {
                out.push(Record::Namespace { path: path.clone(), owner: node.owner.clone() });
            }
        }
        for (path, node) in &self.tags {
            out.push(Record::Tag { path: path.clone(), owner: node.owner.clone() });
        }
        for (name, user) in &self.users {
            let at = self.updated_at(user.object, &user_tag);
            out.push(Record::User {
                username: name.clone(),
                credential: user.credential.clone(),
                object: user.object,
                at,
            });
        }
        for (path, node) in &self.namespaces {
            for (action, policy) in &node.policies {
                out.push(Record::Policy { path: path.clone(), action: *action, policy: policy.clone() });
            }
        }
        for (path, node) in &self.tags {
            for (action, policy) in &node.policies {
                out.push(Record::Policy {
                    path: path.as_path().clone(),
                    action: *action,
                    policy: policy.clone(),
                });
            }
        }
        let user_objects: std::collections::HashSet<_> =
            self.users.values().map(|u| u.object).collect();
        for (id, about_value) in &self.objects {
            if !user_objects.contains(id) {
                let at = self.updated_at(*id, &about);
                out.push(Record::Object { id: *id, about: about_value.clone(), at });
            }
        }
        for (id, tags) in &self.instances {
            for (tag, inst) in tags {
                let derived = (*tag == about && self.objects.get(id).is_some_and(Option::is_some))
                    || (*tag == user_tag && user_objects.contains(id));
                if !derived {
                    out.push(Record::Put {
                        object: *id,
                        tag: tag.clone(),
                        value: inst.value.clone(),
                        at: inst.updated_at,
                    });
                }
            }
        }
        out
    }

    fn updated_at(&self, id: ObjectId, tag: &TagPath) -> u64 {
        self.instances
            .get(&id)
            .and_then(|t| t.get(tag))
            .map(|i| i.updated_at)
            .unwrap_or_default()
    }
}
