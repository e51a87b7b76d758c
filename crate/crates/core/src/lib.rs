//! Openly writeable tag store with owned tags, namespaces, permissions and a
//! small query language, plus tooling that publishes Cactus thorn metadata
//! into the store and turns queries back into component retrieval lists.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds the vocabulary shared by everything else: object ids,
//!   tag paths, tag values and permission policies.
//! * [`store`] is the persistent, permission-enforcing state with primitive
//!   value indexes.
//! * [`query`] parses and evaluates queries, with a brute-force reference
//!   evaluator used to cross-check the indexed one.
//! * [`ccl`] extracts thorn metadata from a thorn source tree.
//! * [`crl`] reads and writes component retrieval lists.
//! * [`publish`] implements the publishing workflows on top of any
//!   [`publish::Catalog`], in-process or remote.

pub mod ccl;
pub mod crl;
pub mod model;
pub mod publish;
pub mod query;
pub mod store;
#[cfg(any(test, feature = "test-support"))]
pub mod testing;

pub use model::{
    classify_value, parse_tag_path, permission_allows, Action, Number, ObjectId, Path, PathError,
    PermissionPolicy, Policy, RawValue, TagPath, TagValue, ValueError, ValueKind,
};
pub use query::{brute_force_eval, eval_query, parse_query, render_query, Query, QueryError};
pub use store::{Store, StoreError, StoreOptions};
