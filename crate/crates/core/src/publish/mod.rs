//! Catalog workflows for thorn metadata: publishing, bulk tagging, thornlist
//! generation, base-set resolution and author discovery.
//!
//! Everything here talks to a [`Catalog`], implemented in-process by
//! [`LocalCatalog`] and over HTTP by the command-line client, so both paths
//! run the same code.

mod catalog;
mod resolve;
mod workflow;

pub use catalog::{Catalog, CatalogError, LocalCatalog, TaggedObject};
pub use resolve::{resolve_closure, Resolution, ResolveError, ThornNode};
pub use workflow::{
    default_prefixes, discover_authors, generate_thornlist, load_thorn_graph, publish_thorn, publish_tree,
    resolve_base_set, tag_membership, thorn_tag, Authors, Membership, PublishError, PublishReport,
    THORN_TAG_NAMES,
};

/// Tag marking thorns that belong to the Einstein Toolkit release.
pub const TOOLKIT_TAG: &str = "einsteintoolkit.org/includes";
/// Tag marking user objects of Cactus authors.
pub const AUTHOR_TAG: &str = "cactuscode.org/author";
/// Namespace below each user where thorn metadata is published.
pub const DEFAULT_NAMESPACE: &str = "CCTK";
