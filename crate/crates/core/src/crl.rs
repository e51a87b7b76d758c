//! Component retrieval lists: the thornlist format consumed by checkout
//! tools.
//!
//! ```text
//! !CRL_VERSION = 1.0
//!
//! !TARGET = $ROOT/arrangements/Carpet
//! !TYPE = git
//! !URL = https://bitbucket.org/eschnett/carpet.git
//! !CHECKOUT = Carpet
//! !CHECKOUT = CarpetLib
//! ```
//!
//! Entries are kept sorted by (arrangement, thorn); consecutive entries that
//! share arrangement, type and URL form one block. [`CrlDocument::parse`]
//! accepts everything [`CrlDocument::render`] produces, plus comments,
//! several names per `!CHECKOUT` and unknown directives, which are ignored.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::ccl::{Scm, ThornMetadata};

pub const CRL_VERSION: &str = "1.0";
const TARGET_PREFIX: &str = "$ROOT/";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CrlError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("conflicting entries for {0}")]
    Conflict(String),
    #[error("invalid entry: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CrlEntry {
    pub arrangement: String,
    pub name: String,
    pub scm: Scm,
    pub url: String,
}

impl CrlEntry {
    pub fn new(arrangement: impl Into<String>, name: impl Into<String>, scm: Scm, url: impl Into<String>) -> Self {
        CrlEntry { arrangement: arrangement.into(), name: name.into(), scm, url: url.into() }
    }

    /// Local checkout directory relative to the Cactus root.
    pub fn target(&self) -> String {
        format!("arrangements/{}", self.arrangement)
    }

    fn validate(&self) -> Result<(), CrlError> {
        let word = |s: &str| !s.is_empty() && !s.contains(char::is_whitespace);
        let segment = |s: &str| word(s) && !s.contains('/') && !s.starts_with('!') && !s.starts_with('#');
        if !segment(&self.arrangement) || !segment(&self.name) || !word(&self.url) {
            return Err(CrlError::Invalid(format!("{self:?}")));
        }
        Ok(())
    }
}

impl From<&ThornMetadata> for CrlEntry {
    fn from(m: &ThornMetadata) -> Self {
        CrlEntry::new(&m.arrangement, &m.name, m.scm, &m.url)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CrlDocument {
    entries: Vec<CrlEntry>,
}

impl CrlDocument {
    /// Builds a document, sorting the entries. Exact duplicates collapse;
    /// two different entries for the same (arrangement, thorn) conflict.
    pub fn new(entries: impl IntoIterator<Item = CrlEntry>) -> Result<Self, CrlError> {
        let mut by_key: BTreeMap<(String, String), CrlEntry> = BTreeMap::new();
        for entry in entries {
            entry.validate()?;
            let key = (entry.arrangement.clone(), entry.name.clone());
            match by_key.get(&key) {
                Some(existing) if *existing != entry => {
                    return Err(CrlError::Conflict(format!("{}/{}", key.0, key.1)));
                }
                Some(_) => {}
                None => {
                    by_key.insert(key, entry);
                }
            }
        }
        Ok(CrlDocument { entries: by_key.into_values().collect() })
    }

    pub fn entries(&self) -> &[CrlEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn render(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<Self, CrlError> {
        let mut version_seen = false;
        let mut target: Option<String> = None;
        let mut scm: Option<Scm> = None;
        let mut url: Option<String> = None;
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let syntax = |message: String| CrlError::Syntax { line, message };
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let directive = trimmed
                .strip_prefix('!')
                .ok_or_else(|| syntax(format!("expected a !DIRECTIVE, found {trimmed:?}")))?;
            let (key, value) =
                directive.split_once('=').ok_or_else(|| syntax(format!("missing '=' in {trimmed:?}")))?;
            let key = key.trim().to_ascii_uppercase();
            let value = value.trim();
            if !version_seen {
                if key != "CRL_VERSION" {
                    return Err(syntax("document must start with !CRL_VERSION".into()));
                }
                if value != CRL_VERSION {
                    return Err(syntax(format!("unsupported CRL version {value:?}")));
                }
                version_seen = true;
                continue;
            }
            match key.as_str() {
                "TARGET" => {
                    let path = value.strip_prefix(TARGET_PREFIX).unwrap_or(value);
                    let arrangement = path
                        .strip_prefix("arrangements/")
                        .map(|a| a.trim_end_matches('/'))
                        .filter(|a| !a.is_empty() && !a.contains('/'))
                        .ok_or_else(|| syntax(format!("target {value:?} is not $ROOT/arrangements/<name>")))?;
                    target = Some(arrangement.to_string());
                    scm = None;
                    url = None;
                }
                "TYPE" => scm = Some(Scm::from_str(value).map_err(syntax)?),
                "URL" => {
                    if value.is_empty() {
                        return Err(syntax("empty !URL".into()));
                    }
                    url = Some(value.to_string());
                }
                "CHECKOUT" => {
                    let (Some(arrangement), Some(scm), Some(url)) = (&target, scm, &url) else {
                        return Err(syntax("!CHECKOUT before !TARGET, !TYPE and !URL".into()));
                    };
                    let names: Vec<&str> = value.split_whitespace().collect();
                    if names.is_empty() {
                        return Err(syntax("empty !CHECKOUT".into()));
                    }
                    for name in names {
                        entries.push(CrlEntry::new(arrangement, name, scm, url));
                    }
                }
                "CRL_VERSION" => return Err(syntax("repeated !CRL_VERSION".into())),
                _ => {}
            }
        }
        if !version_seen {
            return Err(CrlError::Syntax { line: 1, message: "missing !CRL_VERSION header".into() });
        }
        CrlDocument::new(entries)
    }
}

impl fmt::Display for CrlDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "!CRL_VERSION = {CRL_VERSION}")?;
        let mut block: Option<(&str, Scm, &str)> = None;
        for e in &self.entries {
            let key = (e.arrangement.as_str(), e.scm, e.url.as_str());
            if block != Some(key) {
                writeln!(f)?;
                writeln!(f, "!TARGET = {TARGET_PREFIX}{}", e.target())?;
                writeln!(f, "!TYPE = {}", e.scm)?;
                writeln!(f, "!URL = {}", e.url)?;
                block = Some(key);
            }
            writeln!(f, "!CHECKOUT = {}", e.name)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn carpet() -> Vec<CrlEntry> {
        let url = "https://bitbucket.org/eschnett/carpet.git";
        vec![
            CrlEntry::new("Carpet", "CarpetLib", Scm::Git, url),
            CrlEntry::new("CactusBase", "IOUtil", Scm::Svn, "https://svn.example.org/IOUtil"),
            CrlEntry::new("Carpet", "Carpet", Scm::Git, url),
        ]
    }

    #[test]
    fn renders_sorted_blocks() {
        let doc = CrlDocument::new(carpet()).unwrap();
        let expected = "\
!CRL_VERSION = 1.0

!TARGET = $ROOT/arrangements/CactusBase
!TYPE = svn
!URL = https://svn.example.org/IOUtil
!CHECKOUT = IOUtil

!TARGET = $ROOT/arrangements/Carpet
!TYPE = git
!URL = https://bitbucket.org/eschnett/carpet.git
!CHECKOUT = Carpet
!CHECKOUT = CarpetLib
";
        assert_eq!(doc.render(), expected);
        assert_eq!(CrlDocument::parse(expected).unwrap(), doc);
    }

    #[test]
    fn empty_document() {
        let doc = CrlDocument::default();
        assert_eq!(doc.render(), "!CRL_VERSION = 1.0\n");
        assert!(CrlDocument::parse(&doc.render()).unwrap().is_empty());
    }

    #[test]
    fn duplicates() {
        let mut entries = carpet();
        entries.push(entries[0].clone());
        assert_eq!(CrlDocument::new(entries.clone()).unwrap().len(), 3);
        entries.push(CrlEntry::new("Carpet", "Carpet", Scm::Svn, "x"));
        assert!(matches!(CrlDocument::new(entries), Err(CrlError::Conflict(_))));
    }

    #[test]
    fn lenient_parse() {
        let text = "# thornlist\n!CRL_VERSION = 1.0\n!DEFINE ROOT = Cactus\n\n!TARGET = arrangements/A\n!TYPE = GIT\n!URL = u\n!REPO_PATH = $2\n!CHECKOUT = X Y\n";
        let doc = CrlDocument::parse(text).unwrap();
        assert_eq!(doc.entries(), [CrlEntry::new("A", "X", Scm::Git, "u"), CrlEntry::new("A", "Y", Scm::Git, "u")]);
    }

    #[test]
    fn parse_errors() {
        for text in [
            "",
            "!TARGET = $ROOT/arrangements/A",
            "!CRL_VERSION = 2.0",
            "!CRL_VERSION = 1.0\n!CHECKOUT = X",
            "!CRL_VERSION = 1.0\n!TARGET = $ROOT/thorns/A",
            "!CRL_VERSION = 1.0\n!TARGET = $ROOT/arrangements/A\n!TYPE = fossil",
            "!CRL_VERSION = 1.0\nCHECKOUT = X",
        ] {
            assert!(matches!(CrlDocument::parse(text), Err(CrlError::Syntax { .. })), "{text:?}");
        }
    }

    fn entry() -> impl Strategy<Value = CrlEntry> {
        (
            "[A-Za-z][A-Za-z0-9_]{0,6}",
            "[A-Za-z][A-Za-z0-9_]{0,6}",
            prop::sample::select(vec![Scm::Git, Scm::Svn, Scm::Cvs, Scm::Darcs, Scm::Hg]),
            "[a-z]{1,3}://[a-z./]{1,10}",
        )
            .prop_map(|(a, n, s, u)| CrlEntry::new(a, n, s, u))
    }

    proptest! {
        #[test]
        fn round_trip(entries in prop::collection::vec(entry(), 0..30)) {
            let mut unique = BTreeMap::new();
            for e in entries {
                unique.entry((e.arrangement.clone(), e.name.clone())).or_insert(e);
            }
            let doc = CrlDocument::new(unique.into_values()).unwrap();
            let text = doc.render();
            let back = CrlDocument::parse(&text).unwrap();
            prop_assert_eq!(&back, &doc);
            prop_assert_eq!(back.render(), text);
        }

        #[test]
        fn parse_is_total(text in "[!A-Z_=$/ a-z\n#0-9.]{0,200}") {
            let _ = CrlDocument::parse(&text);
        }
    }
}
