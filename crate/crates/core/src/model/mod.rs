//! Domain vocabulary shared by the store, the query engine and the publisher.

mod number;
mod path;
mod permission;
pub mod text;
mod value;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use uuid::Uuid;

pub use number::Number;
pub use path::{parse_tag_path, Path, PathError, TagPath};
pub use permission::{permission_allows, Action, PermissionPolicy, Policy, TargetKind};
pub use value::{classify_value, RawValue, TagValue, ValueError, ValueKind, DEFAULT_OPAQUE_MIME};

/// User that owns the reserved `fluiddb` namespace.
pub const SYSTEM_USER: &str = "fluiddb";
/// Instance administrator, the only user allowed to create users.
pub const ADMIN_USER: &str = "admin";
/// Tag holding an object's immutable about-value.
pub const ABOUT_TAG: &str = "fluiddb/about";
/// Tag placed on the object that represents a user.
pub const USERNAME_TAG: &str = "fluiddb/users/username";

/// Identifier of an object, rendered as a lowercase hyphenated UUID.
///
/// Ordering follows the byte order of the UUID, which coincides with the
/// lexicographic order of the text rendering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(Uuid);

impl ObjectId {
    pub fn new_random() -> Self {
        ObjectId(Uuid::new_v4())
    }

    pub fn from_uuid(uuid: Uuid) -> Self {
        ObjectId(uuid)
    }

    pub fn as_uuid(&self) -> &Uuid {
        &self.0
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.hyphenated())
    }
}

impl FromStr for ObjectId {
    type Err = uuid::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Uuid::parse_str(s).map(ObjectId)
    }
}

/// An ownerless tag container. Two objects are the same object iff their ids
/// are equal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Object {
    pub id: ObjectId,
    pub about: Option<String>,
}

impl PartialEq for Object {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for Object {}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct User {
    pub username: String,
    pub object: ObjectId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Namespace {
    pub path: Path,
    pub owner: String,
    pub namespaces: Vec<String>,
    pub tags: Vec<String>,
}

/// Checks a username against the path segment grammar.
pub fn valid_username(name: &str) -> bool {
    path::valid_segment(name)
}
