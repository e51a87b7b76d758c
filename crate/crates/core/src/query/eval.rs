use std::ops::Bound;

use super::ast::{CompareOp, Literal, Query};
use crate::model::text::{contains_phrase, tokenize};
use crate::model::{ObjectId, TagPath, TagValue};
use crate::store::{IdSet, Store, StoreView, TagIndex};

/// Evaluates `query` through the value indexes. Instances of tags that
/// `actor` cannot read are treated as absent.
pub fn eval_query(view: &StoreView<'_>, query: &Query, actor: Option<&str>) -> IdSet {
    match query {
        Query::And(l, r) => {
            let left = eval_query(view, l, actor);
            if left.is_empty() {
                return left;
            }
            let right = eval_query(view, r, actor);
            left.intersection(&right).copied().collect()
        }
        Query::Or(l, r) => {
            let mut left = eval_query(view, l, actor);
            left.extend(eval_query(view, r, actor));
            left
        }
        Query::Except(l, r) => {
            let left = eval_query(view, l, actor);
            if left.is_empty() {
                return left;
            }
            let right = eval_query(view, r, actor);
            left.difference(&right).copied().collect()
        }
        Query::Has(tag) => with_index(view, tag, actor, |ix| ix.presence.clone()),
        Query::Compare { tag, op, value } => with_index(view, tag, actor, |ix| compare(ix, *op, value)),
        Query::Contains { tag, text } => {
            with_index(view, tag, actor, |ix| ix.members.get(text).cloned().unwrap_or_default())
        }
        Query::Matches { tag, text } => {
            with_index(view, tag, actor, |ix| matches(view, tag, ix, text))
        }
    }
}

fn with_index(
    view: &StoreView<'_>,
    tag: &TagPath,
    actor: Option<&str>,
    f: impl FnOnce(&TagIndex) -> IdSet,
) -> IdSet {
    if !view.can_read(tag, actor) {
        return IdSet::new();
    }
    view.index(tag).map(f).unwrap_or_default()
}

fn compare(ix: &TagIndex, op: CompareOp, value: &Literal) -> IdSet {
    let n = match *value {
        Literal::Bool(b) => {
            let want = if op == CompareOp::Ne { !b } else { b };
            return ix.booleans.get(&want).cloned().unwrap_or_default();
        }
        Literal::Number(n) => n,
    };
    let range = |lo: Bound<_>, hi: Bound<_>| -> IdSet {
        ix.numbers.range((lo, hi)).flat_map(|(_, ids)| ids.iter().copied()).collect()
    };
    match op {
        CompareOp::Eq => ix.numbers.get(&n).cloned().unwrap_or_default(),
        CompareOp::Ne => {
            let mut all = ix.all_numeric();
            if let Some(eq) = ix.numbers.get(&n) {
                all.retain(|id| !eq.contains(id));
            }
            all
        }
        CompareOp::Lt => range(Bound::Unbounded, Bound::Excluded(n)),
        CompareOp::Le => range(Bound::Unbounded, Bound::Included(n)),
        CompareOp::Gt => range(Bound::Excluded(n), Bound::Unbounded),
        CompareOp::Ge => range(Bound::Included(n), Bound::Unbounded),
    }
}

/// Intersects token postings, then confirms the phrase on the stored text.
fn matches(view: &StoreView<'_>, tag: &TagPath, ix: &TagIndex, text: &str) -> IdSet {
    let tokens = tokenize(text);
    let Some((first, rest)) = tokens.split_first() else {
        return IdSet::new();
    };
    let Some(mut candidates) = ix.tokens.get(first).cloned() else {
        return IdSet::new();
    };
    for token in rest {
        match ix.tokens.get(token) {
            Some(ids) => candidates.retain(|id| ids.contains(id)),
            None => return IdSet::new(),
        }
    }
    if rest.is_empty() {
        return candidates;
    }
    candidates.retain(|id: &ObjectId| {
        matches!(view.value(*id, tag), Some(TagValue::String(s)) if contains_phrase(s, text))
    });
    candidates
}

impl Store {
    /// Objects matching `query` as seen by `actor`.
    pub fn query(&self, actor: Option<&str>, query: &Query) -> IdSet {
        eval_query(&self.read(), query, actor)
    }
}
