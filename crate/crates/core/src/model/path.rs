use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("empty path")]
    Empty,
    #[error("empty segment in path {0:?}")]
    EmptySegment(String),
    #[error("illegal character {ch:?} in path {path:?}")]
    IllegalChar { path: String, ch: char },
    #[error("tag path {0:?} needs a namespace and a tag name")]
    TooShort(String),
}

pub(crate) fn valid_segment(seg: &str) -> bool {
    !seg.is_empty() && seg.chars().all(segment_char)
}

pub(crate) fn segment_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-')
}

/// Slash-separated path of one or more segments; names namespaces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path(String);

impl Path {
    pub fn parse(text: &str) -> Result<Self, PathError> {
        if text.is_empty() {
            return Err(PathError::Empty);
        }
        for seg in text.split('/') {
            if seg.is_empty() {
                return Err(PathError::EmptySegment(text.to_string()));
            }
            if let Some(ch) = seg.chars().find(|c| !segment_char(*c)) {
                return Err(PathError::IllegalChar { path: text.to_string(), ch });
            }
        }
        Ok(Path(text.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn segments(&self) -> impl Iterator<Item = &str> {
        self.0.split('/')
    }

    pub fn depth(&self) -> usize {
        self.segments().count()
    }

    /// First segment, the owning user's top-level namespace.
    pub fn root(&self) -> &str {
        self.0.split('/').next().unwrap_or_default()
    }

    pub fn name(&self) -> &str {
        self.0.rsplit('/').next().unwrap_or_default()
    }

    pub fn parent(&self) -> Option<Path> {
        self.0.rsplit_once('/').map(|(p, _)| Path(p.to_string()))
    }

    pub fn child(&self, name: &str) -> Result<Path, PathError> {
        Path::parse(&format!("{}/{}", self.0, name))
    }

    /// Ancestors from the root down, excluding `self`.
    pub fn ancestors(&self) -> Vec<Path> {
        self.0
            .char_indices()
            .filter(|&(_, c)| c == '/')
            .map(|(i, _)| Path(self.0[..i].to_string()))
            .collect()
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Path {
    type Err = PathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Path::parse(s)
    }
}

/// Fully qualified tag name such as `eric/rating`: a namespace path plus the
/// tag's own name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TagPath(Path);

impl TagPath {
    pub fn parse(text: &str) -> Result<Self, PathError> {
        let path = Path::parse(text)?;
        if path.depth() < 2 {
            return Err(PathError::TooShort(text.to_string()));
        }
        Ok(TagPath(path))
    }

    pub fn as_str(&self) -> &str {
        self.0.as_str()
    }

    pub fn as_path(&self) -> &Path {
        &self.0
    }

    pub fn segments(&self) -> impl Iterator<Item = &str> {
        self.0.segments()
    }

    pub fn owner_namespace(&self) -> &str {
        self.0.root()
    }

    pub fn name(&self) -> &str {
        self.0.name()
    }

    pub fn namespace(&self) -> Path {
        self.0.parent().expect("tag paths have at least two segments")
    }

    /// `prefix/name`, e.g. `eric/CCTK` + `url`.
    pub fn join(prefix: &Path, name: &str) -> Result<TagPath, PathError> {
        prefix.child(name).map(TagPath)
    }
}

impl From<TagPath> for Path {
    fn from(tag: TagPath) -> Path {
        tag.0
    }
}

impl fmt::Display for TagPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TagPath {
    type Err = PathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TagPath::parse(s)
    }
}

pub fn parse_tag_path(text: &str) -> Result<TagPath, PathError> {
    TagPath::parse(text)
}

macro_rules! string_serde {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let text = String::deserialize(d)?;
                <$ty>::parse(&text).map_err(serde::de::Error::custom)
            }
        }
    };
}

string_serde!(Path);
string_serde!(TagPath);
