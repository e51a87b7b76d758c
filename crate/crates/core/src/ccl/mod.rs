//! Thorn metadata extraction from a Cactus thorn source tree.
//!
//! `interface.ccl` supplies `implements`/`inherits`/`friend`,
//! `configuration.ccl` the provided/required capabilities, and the README the
//! thorn name, authors and description. The version-control system and URL
//! come from a separate manifest. `param.ccl`, `schedule.ccl` and `test.ccl`
//! are only checked for presence.

mod configuration;
mod interface;
mod manifest;
mod readme;

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use configuration::{parse_configuration_ccl, CapabilityDeps};
pub use interface::{parse_interface_ccl, InterfaceDecl};
pub use manifest::{Manifest, ManifestEntry};
pub use readme::{parse_readme, ReadmeInfo};

#[derive(Debug, Error)]
pub enum CclError {
    #[error("malformed interface.ccl: {0}")]
    MalformedInterface(String),
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error("metadata incomplete for {thorn}: {message}")]
    MetadataIncomplete { thorn: String, message: String },
    #[error("{0} does not look like a thorn directory")]
    NotAThorn(PathBuf),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scm {
    Git,
    Svn,
    Cvs,
    Darcs,
    Hg,
}

impl Scm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scm::Git => "git",
            Scm::Svn => "svn",
            Scm::Cvs => "cvs",
            Scm::Darcs => "darcs",
            Scm::Hg => "hg",
        }
    }
}

impl fmt::Display for Scm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "git" => Ok(Scm::Git),
            "svn" => Ok(Scm::Svn),
            "cvs" => Ok(Scm::Cvs),
            "darcs" => Ok(Scm::Darcs),
            "hg" => Ok(Scm::Hg),
            _ => Err(format!("unknown version control system {s:?}")),
        }
    }
}

/// The published description of one thorn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThornMetadata {
    pub arrangement: String,
    pub name: String,
    pub authors: Vec<String>,
    pub description: String,
    pub implements: Vec<String>,
    pub inherits: Vec<String>,
    pub scm: Scm,
    pub url: String,
}

impl ThornMetadata {
    /// About-value convention for thorn objects: `CCTK:<arrangement>/<thorn>`.
    pub fn about(&self) -> String {
        thorn_about(&self.arrangement, &self.name)
    }
}

pub fn thorn_about(arrangement: &str, name: &str) -> String {
    format!("CCTK:{arrangement}/{name}")
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CclFiles {
    pub interface: bool,
    pub param: bool,
    pub schedule: bool,
    pub configuration: bool,
    pub test: bool,
    pub readme: bool,
}

/// Everything extracted from a thorn directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thorn {
    pub metadata: ThornMetadata,
    pub friends: Vec<String>,
    pub capabilities: CapabilityDeps,
    pub files: CclFiles,
    pub warnings: Vec<String>,
}

fn read_optional(path: &Path) -> Result<Option<String>, CclError> {
    match fs::read(path) {
        Ok(bytes) => Ok(Some(String::from_utf8_lossy(&bytes).into_owned())),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(source) => Err(CclError::Io { path: path.to_path_buf(), source }),
    }
}

fn find_readme(dir: &Path) -> Option<PathBuf> {
    ["README", "Readme", "README.md", "readme", "README.txt"]
        .iter()
        .map(|name| dir.join(name))
        .find(|p| p.is_file())
}

pub fn extract_thorn(dir: &Path, manifest: &Manifest) -> Result<Thorn, CclError> {
    let name = dir.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
    let arrangement = dir
        .parent()
        .and_then(|p| p.file_name())
        .and_then(|n| n.to_str())
        .unwrap_or_default()
        .to_string();
    let key = format!("{arrangement}/{name}");
    let interface_text = read_optional(&dir.join("interface.ccl"))?;
    let readme_path = find_readme(dir);
    if interface_text.is_none() && readme_path.is_none() {
        return Err(CclError::NotAThorn(dir.to_path_buf()));
    }
    if name.is_empty() || arrangement.is_empty() {
        return Err(CclError::MetadataIncomplete { thorn: key, message: "no arrangement/thorn directory name".into() });
    }
    let mut warnings = Vec::new();

    let interface = match &interface_text {
        Some(text) => parse_interface_ccl(text)?,
        None => {
            warnings.push("no interface.ccl".to_string());
            InterfaceDecl::default()
        }
    };
    warnings.extend(interface.warnings.iter().cloned());

    let configuration_text = read_optional(&dir.join("configuration.ccl"))?;
    let capabilities = configuration_text.as_deref().map(parse_configuration_ccl).unwrap_or_default();

    let readme = match &readme_path {
        Some(p) => parse_readme(&read_optional(p)?.unwrap_or_default()),
        None => {
            warnings.push("no README".to_string());
            ReadmeInfo::default()
        }
    };
    warnings.extend(readme.warnings.iter().cloned());
    if let Some(header) = &readme.name {
        if *header != name {
            warnings.push(format!("README names thorn {header:?}, directory is {name:?}"));
        }
    }

    let entry = manifest.get(&arrangement, &name).ok_or_else(|| CclError::MetadataIncomplete {
        thorn: key.clone(),
        message: "no manifest entry (scm and url unknown)".into(),
    })?;

    Ok(Thorn {
        metadata: ThornMetadata {
            arrangement,
            name,
            authors: readme.authors,
            description: readme.description,
            implements: interface.implements,
            inherits: interface.inherits,
            scm: entry.scm,
            url: entry.url.clone(),
        },
        friends: interface.friends,
        capabilities,
        files: CclFiles {
            interface: interface_text.is_some(),
            param: dir.join("param.ccl").is_file(),
            schedule: dir.join("schedule.ccl").is_file(),
            configuration: configuration_text.is_some(),
            test: dir.join("test.ccl").is_file(),
            readme: readme_path.is_some(),
        },
        warnings,
    })
}

pub fn extract_thorn_metadata(dir: &Path, manifest: &Manifest) -> Result<ThornMetadata, CclError> {
    extract_thorn(dir, manifest).map(|t| t.metadata)
}

/// Thorn directories under `root`, which may be a Cactus tree (containing
/// `arrangements/`) or an arrangements directory itself. Sorted by
/// arrangement, then thorn.
pub fn discover_thorns(root: &Path) -> Result<Vec<PathBuf>, CclError> {
    let base = if root.join("arrangements").is_dir() { root.join("arrangements") } else { root.to_path_buf() };
    let io_err = |source| CclError::Io { path: base.clone(), source };
    let mut found = Vec::new();
    let mut arrangements: Vec<_> = fs::read_dir(&base)
        .map_err(io_err)?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    arrangements.sort();
    for arrangement in arrangements {
        let mut thorns: Vec<_> = fs::read_dir(&arrangement)
            .map_err(|source| CclError::Io { path: arrangement.clone(), source })?
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.join("interface.ccl").is_file() || find_readme(p).is_some())
            .collect();
        thorns.sort();
        found.extend(thorns);
    }
    Ok(found)
}

/// Strips a `#` comment from one line.
fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(code, _)| code)
}

/// Joins `\`-continued lines and removes comments.
fn logical_lines(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut pending = String::new();
    for raw in text.lines() {
        let line = strip_comment(raw).trim_end();
        match line.strip_suffix('\\') {
            Some(head) => {
                pending.push_str(head);
                pending.push(' ');
            }
            None => {
                pending.push_str(line);
                out.push(std::mem::take(&mut pending));
            }
        }
    }
    if !pending.is_empty() {
        out.push(pending);
    }
    out
}

fn push_unique(list: &mut Vec<String>, item: String) {
    if !list.contains(&item) {
        list.push(item);
    }
}
