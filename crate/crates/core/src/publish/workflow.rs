use std::collections::BTreeMap;
use std::path::Path as FsPath;

use thiserror::Error;

use super::catalog::{Catalog, CatalogError};
use super::resolve::{resolve_closure, Resolution, ResolveError, ThornNode};
use super::{AUTHOR_TAG, DEFAULT_NAMESPACE, TOOLKIT_TAG};
use crate::ccl::{discover_thorns, extract_thorn, CclError, Manifest, Scm, ThornMetadata};
use crate::crl::{CrlDocument, CrlEntry, CrlError};
use crate::model::{ObjectId, Path, TagPath, TagValue, ABOUT_TAG, USERNAME_TAG};

/// Tags written under the prefix for every published thorn.
pub const THORN_TAG_NAMES: [&str; 8] =
    ["arrangement", "authors", "description", "implements", "inherits", "name", "scm", "url"];

/// The four tags a thornlist entry is assembled from.
const CRL_TAG_NAMES: [&str; 4] = ["arrangement", "name", "url", "scm"];

#[derive(Debug, Error)]
pub enum PublishError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("incomplete data: {}", .0.join("; "))]
    Incomplete(Vec<String>),
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error(transparent)]
    Crl(#[from] CrlError),
    #[error(transparent)]
    Ccl(#[from] CclError),
}

pub fn thorn_tag(prefix: &Path, name: &str) -> TagPath {
    TagPath::join(prefix, name).expect("thorn tag names are valid path segments")
}

fn tag(text: &str) -> TagPath {
    TagPath::parse(text).expect("reserved tag path")
}

/// Writes the eight thorn tags on the object about `CCTK:<arrangement>/<thorn>`.
/// Republishing overwrites the same instances with the same values.
pub fn publish_thorn(catalog: &dyn Catalog, meta: &ThornMetadata, prefix: &Path) -> Result<ObjectId, PublishError> {
    if meta.arrangement.is_empty() || meta.name.is_empty() || meta.url.is_empty() {
        return Err(PublishError::Incomplete(vec![format!("{}: arrangement, name and url are required", meta.about())]));
    }
    let id = catalog.object_for_about(&meta.about())?;
    let values = [
        TagValue::String(meta.arrangement.clone()),
        TagValue::string_set(&meta.authors),
        TagValue::String(meta.description.clone()),
        TagValue::string_set(&meta.implements),
        TagValue::string_set(&meta.inherits),
        TagValue::String(meta.name.clone()),
        TagValue::String(meta.scm.as_str().to_string()),
        TagValue::String(meta.url.clone()),
    ];
    for (name, value) in THORN_TAG_NAMES.iter().zip(&values) {
        catalog.put(id, &thorn_tag(prefix, name), value)?;
    }
    Ok(id)
}

#[derive(Debug, Default)]
pub struct PublishReport {
    pub published: Vec<(String, ObjectId)>,
    /// Thorns that could not be published, with the reason.
    pub incomplete: Vec<String>,
    pub warnings: Vec<String>,
}

/// Extracts and publishes every thorn found below `root`. Thorns with
/// incomplete metadata are reported and skipped; catalog failures abort.
pub fn publish_tree(
    catalog: &dyn Catalog,
    root: &FsPath,
    manifest: &Manifest,
    prefix: &Path,
) -> Result<PublishReport, PublishError> {
    let mut report = PublishReport::default();
    for dir in discover_thorns(root)? {
        match extract_thorn(&dir, manifest) {
            Ok(thorn) => {
                let about = thorn.metadata.about();
                report.warnings.extend(thorn.warnings.iter().map(|w| format!("{about}: {w}")));
                let id = publish_thorn(catalog, &thorn.metadata, prefix)?;
                report.published.push((about, id));
            }
            Err(e @ CclError::Io { .. }) => return Err(e.into()),
            Err(e) => report.incomplete.push(e.to_string()),
        }
    }
    Ok(report)
}

#[derive(Debug, Default)]
pub struct Membership {
    pub tagged: Vec<String>,
    /// About-values with no object.
    pub missing: Vec<String>,
    pub failed: Vec<(String, CatalogError)>,
}

/// Puts `value` on every object named in `abouts`. Missing objects and
/// individual write failures are reported; only a run where every write
/// failed is an error.
pub fn tag_membership(
    catalog: &dyn Catalog,
    abouts: &[String],
    tag: &TagPath,
    value: &TagValue,
) -> Result<Membership, PublishError> {
    let mut result = Membership::default();
    for about in abouts {
        match catalog.find_about(about)? {
            None => result.missing.push(about.clone()),
            Some(id) => match catalog.put(id, tag, value) {
                Ok(()) => result.tagged.push(about.clone()),
                Err(e) => result.failed.push((about.clone(), e)),
            },
        }
    }
    if result.tagged.is_empty() {
        if let Some((_, e)) = result.failed.first() {
            return Err(e.clone().into());
        }
    }
    Ok(result)
}

fn require_prefixes(prefixes: &[Path]) -> Result<(), PublishError> {
    if prefixes.is_empty() {
        return Err(PublishError::Incomplete(vec!["no tag prefixes given".into()]));
    }
    Ok(())
}

fn crl_entry(values: &BTreeMap<TagPath, TagValue>, prefix: &Path) -> Option<CrlEntry> {
    let field = |name: &str| values.get(&thorn_tag(prefix, name)).and_then(TagValue::as_str);
    let [arrangement, name, url, scm] = CRL_TAG_NAMES.map(field);
    Some(CrlEntry::new(arrangement?, name?, scm?.parse::<Scm>().ok()?, url?))
}

/// Builds a thornlist from the objects matching `query`. Each object's
/// entry comes from the first prefix under which all four of its
/// arrangement, name, url and scm tags are present.
pub fn generate_thornlist(catalog: &dyn Catalog, query: &str, prefixes: &[Path]) -> Result<CrlDocument, PublishError> {
    require_prefixes(prefixes)?;
    let mut tags = vec![tag(ABOUT_TAG)];
    for prefix in prefixes {
        tags.extend(CRL_TAG_NAMES.iter().map(|n| thorn_tag(prefix, n)));
    }
    let mut entries = Vec::new();
    let mut incomplete = Vec::new();
    for object in catalog.query_values(query, &tags)? {
        match prefixes.iter().find_map(|p| crl_entry(&object.values, p)) {
            Some(entry) => entries.push(entry),
            None => incomplete.push(format!(
                "{} lacks arrangement/name/url/scm under every prefix",
                object.about().map_or_else(|| object.id.to_string(), str::to_string)
            )),
        }
    }
    if !incomplete.is_empty() {
        return Err(PublishError::Incomplete(incomplete));
    }
    Ok(CrlDocument::new(entries)?)
}

/// Every object with published interface data under any of `prefixes`.
/// The first prefix carrying an `implements` tag supplies both interface
/// lists; `inherits` may be a single string or a set.
pub fn load_thorn_graph(catalog: &dyn Catalog, prefixes: &[Path]) -> Result<BTreeMap<String, ThornNode>, PublishError> {
    require_prefixes(prefixes)?;
    let query = prefixes
        .iter()
        .map(|p| format!("has {}", thorn_tag(p, "implements")))
        .collect::<Vec<_>>()
        .join(" or ");
    let mut tags = vec![tag(ABOUT_TAG), tag(TOOLKIT_TAG)];
    for prefix in prefixes {
        tags.push(thorn_tag(prefix, "implements"));
        tags.push(thorn_tag(prefix, "inherits"));
    }
    let mut graph = BTreeMap::new();
    for object in catalog.query_values(&query, &tags)? {
        let Some(about) = object.about() else { continue };
        let Some((implements, inherits)) = prefixes.iter().find_map(|p| {
            let implements = object.values.get(&thorn_tag(p, "implements"))?.as_name_set()?;
            let inherits = object
                .values
                .get(&thorn_tag(p, "inherits"))
                .and_then(TagValue::as_name_set)
                .unwrap_or_default();
            Some((implements, inherits))
        }) else {
            continue;
        };
        let toolkit = matches!(object.values.get(&tag(TOOLKIT_TAG)), Some(TagValue::Boolean(true)));
        graph.insert(about.to_string(), ThornNode { about: about.to_string(), implements, inherits, toolkit });
    }
    Ok(graph)
}

pub fn resolve_base_set(catalog: &dyn Catalog, base: &[String], prefixes: &[Path]) -> Result<Resolution, PublishError> {
    let graph = load_thorn_graph(catalog, prefixes)?;
    Ok(resolve_closure(&graph, base)?)
}

#[derive(Debug, Default, PartialEq)]
pub struct Authors {
    /// Sorted usernames.
    pub usernames: Vec<String>,
    /// Author-tagged objects that carry no username.
    pub skipped: Vec<ObjectId>,
}

pub fn discover_authors(catalog: &dyn Catalog) -> Result<Authors, PublishError> {
    let username = tag(USERNAME_TAG);
    let mut authors = Authors::default();
    for object in catalog.query_values(&format!("has {AUTHOR_TAG}"), std::slice::from_ref(&username))? {
        match object.values.get(&username).and_then(TagValue::as_str) {
            Some(name) => authors.usernames.push(name.to_string()),
            None => authors.skipped.push(object.id),
        }
    }
    authors.usernames.sort();
    authors.usernames.dedup();
    Ok(authors)
}

/// `<author>/CCTK` for each discovered author, or the actor's own prefix
/// when no authors are tagged.
pub fn default_prefixes(catalog: &dyn Catalog) -> Result<Vec<Path>, PublishError> {
    let authors = discover_authors(catalog)?.usernames;
    let users = if authors.is_empty() { catalog.actor()?.into_iter().collect() } else { authors };
    if users.is_empty() {
        return Err(PublishError::Incomplete(vec!["no tag prefixes given and none could be discovered".into()]));
    }
    Ok(users
        .iter()
        .filter_map(|u| Path::parse(&format!("{u}/{DEFAULT_NAMESPACE}")).ok())
        .collect())
}
