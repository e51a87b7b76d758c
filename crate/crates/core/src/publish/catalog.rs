use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::{ObjectId, TagPath, TagValue, ABOUT_TAG};
use crate::query::parse_query;
use crate::store::{Store, StoreError};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CatalogError {
    #[error("authentication required")]
    Unauthenticated,
    #[error("permission denied: {0}")]
    Denied(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("rejected: {0}")]
    Invalid(String),
    #[error("catalog unavailable: {0}")]
    Unavailable(String),
}

impl From<StoreError> for CatalogError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Unauthenticated => CatalogError::Unauthenticated,
            StoreError::PermissionDenied(m) => CatalogError::Denied(m),
            StoreError::Immutable(_) => CatalogError::Denied(e.to_string()),
            StoreError::NotFound(m) => CatalogError::NotFound(m),
            StoreError::Duplicate(_) | StoreError::Path(_) | StoreError::Invalid(_) => {
                CatalogError::Invalid(e.to_string())
            }
            StoreError::Locked(_) | StoreError::Corrupt(_) | StoreError::Io(_) => {
                CatalogError::Unavailable(e.to_string())
            }
        }
    }
}

/// An object together with the requested tag values that are visible on it.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedObject {
    pub id: ObjectId,
    pub values: BTreeMap<TagPath, TagValue>,
}

impl TaggedObject {
    pub fn about(&self) -> Option<&str> {
        self.values.iter().find(|(t, _)| t.as_str() == ABOUT_TAG).and_then(|(_, v)| v.as_str())
    }
}

/// The operations the workflows need from a tag catalog.
pub trait Catalog {
    /// The authenticated user, if any.
    fn actor(&self) -> Result<Option<String>, CatalogError>;
    /// The object carrying `about`, created if absent.
    fn object_for_about(&self, about: &str) -> Result<ObjectId, CatalogError>;
    /// The object carrying `about`, if one exists.
    fn find_about(&self, about: &str) -> Result<Option<ObjectId>, CatalogError>;
    fn put(&self, id: ObjectId, tag: &TagPath, value: &TagValue) -> Result<(), CatalogError>;
    /// `None` when the instance is absent or not readable.
    fn get(&self, id: ObjectId, tag: &TagPath) -> Result<Option<TagValue>, CatalogError>;
    /// Matching object ids in ascending order.
    fn query(&self, query: &str) -> Result<Vec<ObjectId>, CatalogError>;

    /// Matching objects with the values of `tags` they carry.
    fn query_values(&self, query: &str, tags: &[TagPath]) -> Result<Vec<TaggedObject>, CatalogError> {
        self.query(query)?
            .into_iter()
            .map(|id| {
                let mut values = BTreeMap::new();
                for tag in tags {
                    if let Some(v) = self.get(id, tag)? {
                        values.insert(tag.clone(), v);
                    }
                }
                Ok(TaggedObject { id, values })
            })
            .collect()
    }
}

/// A catalog backed directly by a [`Store`], acting as one user.
pub struct LocalCatalog<'a> {
    store: &'a Store,
    actor: Option<String>,
}

impl<'a> LocalCatalog<'a> {
    pub fn new(store: &'a Store, actor: Option<&str>) -> Self {
        LocalCatalog { store, actor: actor.map(str::to_string) }
    }

    fn writer(&self) -> Result<&str, CatalogError> {
        self.actor.as_deref().ok_or(CatalogError::Unauthenticated)
    }
}

impl Catalog for LocalCatalog<'_> {
    fn actor(&self) -> Result<Option<String>, CatalogError> {
        Ok(self.actor.clone())
    }

    fn object_for_about(&self, about: &str) -> Result<ObjectId, CatalogError> {
        Ok(self.store.create_object(self.writer()?, Some(about))?)
    }

    fn find_about(&self, about: &str) -> Result<Option<ObjectId>, CatalogError> {
        Ok(self.store.object_by_about(about))
    }

    fn put(&self, id: ObjectId, tag: &TagPath, value: &TagValue) -> Result<(), CatalogError> {
        self.store.put_tag(self.writer()?, id, tag, value.clone())?;
        Ok(())
    }

    fn get(&self, id: ObjectId, tag: &TagPath) -> Result<Option<TagValue>, CatalogError> {
        match self.store.get_tag(self.actor.as_deref(), id, tag) {
            Ok(v) => Ok(Some(v)),
            Err(StoreError::NotFound(_)) => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    fn query(&self, query: &str) -> Result<Vec<ObjectId>, CatalogError> {
        let parsed = parse_query(query).map_err(|e| CatalogError::Invalid(e.to_string()))?;
        Ok(self.store.query(self.actor.as_deref(), &parsed).into_iter().collect())
    }
}
