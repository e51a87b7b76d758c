use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{strip_comment, CclError, Scm};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub scm: Scm,
    pub url: String,
}

/// Maps `<arrangement>/<thorn>` to its repository. One entry per line:
/// `<arrangement>/<thorn> <scm> <url>`, whitespace separated, `#` comments.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    entries: BTreeMap<(String, String), ManifestEntry>,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self, CclError> {
        let mut manifest = Manifest::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| CclError::Manifest { line, message };
            let fields: Vec<&str> = strip_comment(raw).split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let [path, scm, url] = fields[..] else {
                return Err(err(format!("expected 3 fields, found {}", fields.len())));
            };
            let (arrangement, thorn) = path
                .split_once('/')
                .filter(|(a, t)| !a.is_empty() && !t.is_empty() && !t.contains('/'))
                .ok_or_else(|| err(format!("{path:?} is not <arrangement>/<thorn>")))?;
            let scm = Scm::from_str(scm).map_err(err)?;
            let key = (arrangement.to_string(), thorn.to_string());
            if manifest.entries.contains_key(&key) {
                return Err(err(format!("duplicate entry for {path}")));
            }
            manifest.entries.insert(key, ManifestEntry { scm, url: url.to_string() });
        }
        Ok(manifest)
    }

    pub fn get(&self, arrangement: &str, thorn: &str) -> Option<&ManifestEntry> {
        self.entries.get(&(arrangement.to_string(), thorn.to_string()))
    }

    pub fn insert(&mut self, arrangement: &str, thorn: &str, entry: ManifestEntry) {
        self.entries.insert((arrangement.to_string(), thorn.to_string()), entry);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, &ManifestEntry)> {
        self.entries.iter().map(|((a, t), e)| (a.as_str(), t.as_str(), e))
    }
}

impl fmt::Display for Manifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (arrangement, thorn, entry) in self.iter() {
            writeln!(f, "{arrangement}/{thorn} {} {}", entry.scm, entry.url)?;
        }
        Ok(())
    }
}
