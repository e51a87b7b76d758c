//! Secondary indexes over tag instances.
//!
//! Every instance lands in the presence index. Primitive instances are also
//! indexed by value: numbers in an ordered map (integers and floats share one
//! key space), booleans, nulls, exact strings, string tokens for textual
//! matching, and string-set members. Opaque instances only ever appear in the
//! presence index.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::model::text::tokenize;
use crate::model::{Number, ObjectId, TagPath, TagValue};

pub type IdSet = BTreeSet<ObjectId>;

#[derive(Debug, Default, Clone, PartialEq)]
pub struct TagIndex {
    pub presence: IdSet,
    pub numbers: BTreeMap<Number, IdSet>,
    pub booleans: BTreeMap<bool, IdSet>,
    pub nulls: IdSet,
    pub strings: BTreeMap<String, IdSet>,
    pub tokens: BTreeMap<String, IdSet>,
    pub members: BTreeMap<String, IdSet>,
}

impl TagIndex {
    fn is_empty(&self) -> bool {
        self.presence.is_empty()
    }

    /// Every object holding a numeric instance of this tag.
    pub fn all_numeric(&self) -> IdSet {
        self.numbers.values().flatten().copied().collect()
    }
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct Index {
    tags: HashMap<TagPath, TagIndex>,
}

fn add<K: Ord>(map: &mut BTreeMap<K, IdSet>, key: K, id: ObjectId) {
    map.entry(key).or_default().insert(id);
}

fn remove<K: Ord>(map: &mut BTreeMap<K, IdSet>, key: &K, id: &ObjectId) {
    if let Some(set) = map.get_mut(key) {
        set.remove(id);
        if set.is_empty() {
            map.remove(key);
        }
    }
}

impl Index {
    pub fn tag(&self, tag: &TagPath) -> Option<&TagIndex> {
        self.tags.get(tag)
    }

    pub fn insert(&mut self, id: ObjectId, tag: &TagPath, value: &TagValue) {
        let ix = self.tags.entry(tag.clone()).or_default();
        ix.presence.insert(id);
        match value {
            TagValue::Integer(_) | TagValue::Float(_) => {
                if let Some(n) = value.as_number() {
                    add(&mut ix.numbers, n, id);
                }
            }
            TagValue::Boolean(b) => add(&mut ix.booleans, *b, id),
            TagValue::Null => {
                ix.nulls.insert(id);
            }
            TagValue::String(s) => {
                add(&mut ix.strings, s.clone(), id);
                for token in tokenize(s) {
                    add(&mut ix.tokens, token, id);
                }
            }
            TagValue::StringSet(set) => {
                for member in set {
                    add(&mut ix.members, member.clone(), id);
                }
            }
            TagValue::Opaque(_) => {}
        }
    }

    pub fn remove(&mut self, id: ObjectId, tag: &TagPath, value: &TagValue) {
        let Some(ix) = self.tags.get_mut(tag) else {
            return;
        };
        ix.presence.remove(&id);
        match value {
            TagValue::Integer(_) | TagValue::Float(_) => {
                if let Some(n) = value.as_number() {
                    remove(&mut ix.numbers, &n, &id);
                }
            }
            TagValue::Boolean(b) => remove(&mut ix.booleans, b, &id),
            TagValue::Null => {
                ix.nulls.remove(&id);
            }
            TagValue::String(s) => {
                remove(&mut ix.strings, s, &id);
                for token in tokenize(s) {
                    remove(&mut ix.tokens, &token, &id);
                }
            }
            TagValue::StringSet(set) => {
                for member in set {
                    remove(&mut ix.members, member, &id);
                }
            }
            TagValue::Opaque(_) => {}
        }
        if ix.is_empty() {
            self.tags.remove(tag);
        }
    }

    pub fn entries(&self) -> usize {
        self.tags.values().map(|ix| ix.presence.len()).sum()
    }
}
