//! Reference evaluator: scans every object and every visible instance,
//! never touching the indexes. Used to cross-check [`super::eval_query`].

use std::cmp::Ordering;

use super::ast::{CompareOp, Literal, Query};
use crate::model::{ObjectId, TagValue};
use crate::store::{IdSet, StoreView};

pub fn brute_force_eval(view: &StoreView<'_>, query: &Query, actor: Option<&str>) -> IdSet {
    view.objects().filter(|id| holds(view, *id, query, actor)).collect()
}

fn holds(view: &StoreView<'_>, id: ObjectId, query: &Query, actor: Option<&str>) -> bool {
    let visible = |tag| {
        if view.can_read(tag, actor) {
            view.value(id, tag)
        } else {
            None
        }
    };
    match query {
        Query::And(l, r) => holds(view, id, l, actor) && holds(view, id, r, actor),
        Query::Or(l, r) => holds(view, id, l, actor) || holds(view, id, r, actor),
        Query::Except(l, r) => holds(view, id, l, actor) && !holds(view, id, r, actor),
        Query::Has(tag) => visible(tag).is_some(),
        Query::Compare { tag, op, value } => match (visible(tag), value) {
            (Some(TagValue::Boolean(b)), Literal::Bool(want)) => match op {
                CompareOp::Eq => b == want,
                CompareOp::Ne => b != want,
                _ => false,
            },
            (Some(v), Literal::Number(n)) => match v.as_number() {
                Some(x) => {
                    let ord = x.cmp(n);
                    match op {
                        CompareOp::Eq => ord == Ordering::Equal,
                        CompareOp::Ne => ord != Ordering::Equal,
                        CompareOp::Lt => ord == Ordering::Less,
                        CompareOp::Le => ord != Ordering::Greater,
                        CompareOp::Gt => ord == Ordering::Greater,
                        CompareOp::Ge => ord != Ordering::Less,
                    }
                }
                None => false,
            },
            _ => false,
        },
        Query::Contains { tag, text } => {
            matches!(visible(tag), Some(TagValue::StringSet(set)) if set.contains(text))
        }
        Query::Matches { tag, text } => {
            matches!(visible(tag), Some(TagValue::String(s)) if phrase_in(s, text))
        }
    }
}

fn words(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn phrase_in(haystack: &str, needle: &str) -> bool {
    let (hay, needle) = (words(haystack), words(needle));
    !needle.is_empty()
        && hay.len() >= needle.len()
        && (0..=hay.len() - needle.len()).any(|i| hay[i..i + needle.len()] == needle[..])
}
