use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Open,
    Closed,
}

/// Who may perform one action: everyone except the listed users (`Open`) or
/// no one except the listed users (`Closed`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermissionPolicy {
    pub policy: Policy,
    #[serde(default)]
    pub exceptions: BTreeSet<String>,
}

impl PermissionPolicy {
    pub fn open() -> Self {
        PermissionPolicy { policy: Policy::Open, exceptions: BTreeSet::new() }
    }

    pub fn closed_except<I, S>(users: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        PermissionPolicy {
            policy: Policy::Closed,
            exceptions: users.into_iter().map(Into::into).collect(),
        }
    }

    pub fn new<I, S>(policy: Policy, exceptions: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        PermissionPolicy { policy, exceptions: exceptions.into_iter().map(Into::into).collect() }
    }

    /// Anonymous callers are never in an exception list.
    pub fn admits(&self, user: Option<&str>) -> bool {
        let listed = user.is_some_and(|u| self.exceptions.contains(u));
        match self.policy {
            Policy::Open => !listed,
            Policy::Closed => listed,
        }
    }
}

pub fn permission_allows(policy: &PermissionPolicy, user: &str) -> bool {
    policy.admits(Some(user))
}

/// Tag actions are create/read/update/delete; namespace actions are
/// create/list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Create,
    Read,
    Update,
    Delete,
    List,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    Namespace,
    Tag,
}

impl Action {
    pub const TAG: [Action; 4] = [Action::Create, Action::Read, Action::Update, Action::Delete];
    pub const NAMESPACE: [Action; 2] = [Action::Create, Action::List];

    pub fn applies_to(&self, kind: TargetKind) -> bool {
        match kind {
            TargetKind::Tag => Action::TAG.contains(self),
            TargetKind::Namespace => Action::NAMESPACE.contains(self),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Action::Create => "create",
            Action::Read => "read",
            Action::Update => "update",
            Action::Delete => "delete",
            Action::List => "list",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "create" => Ok(Action::Create),
            "read" => Ok(Action::Read),
            "update" => Ok(Action::Update),
            "delete" => Ok(Action::Delete),
            "list" => Ok(Action::List),
            _ => Err(format!("unknown action {s:?}")),
        }
    }
}
