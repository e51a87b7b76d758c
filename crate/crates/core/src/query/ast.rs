use std::fmt;

use crate::model::{Number, TagPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareOp {
    pub const ALL: [CompareOp; 6] =
        [CompareOp::Eq, CompareOp::Ne, CompareOp::Lt, CompareOp::Le, CompareOp::Gt, CompareOp::Ge];

    pub fn as_str(&self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Ne => "!=",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<CompareOp> {
        CompareOp::ALL.into_iter().find(|op| op.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Literal {
    Number(Number),
    /// Only valid with `=` and `!=`.
    Bool(bool),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Number(n) => n.fmt(f),
            Literal::Bool(b) => b.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Query {
    Has(TagPath),
    Compare { tag: TagPath, op: CompareOp, value: Literal },
    Matches { tag: TagPath, text: String },
    Contains { tag: TagPath, text: String },
    And(Box<Query>, Box<Query>),
    Or(Box<Query>, Box<Query>),
    Except(Box<Query>, Box<Query>),
}

impl Query {
    pub fn and(self, other: Query) -> Query {
        Query::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Query) -> Query {
        Query::Or(Box::new(self), Box::new(other))
    }

    pub fn except(self, other: Query) -> Query {
        Query::Except(Box::new(self), Box::new(other))
    }

    pub fn depth(&self) -> usize {
        match self {
            Query::And(l, r) | Query::Or(l, r) | Query::Except(l, r) => 1 + l.depth().max(r.depth()),
            _ => 1,
        }
    }
}

fn write_quoted(f: &mut fmt::Formatter<'_>, text: &str) -> fmt::Result {
    f.write_str("\"")?;
    for c in text.chars() {
        if c == '"' || c == '\\' {
            f.write_str("\\")?;
        }
        write!(f, "{c}")?;
    }
    f.write_str("\"")
}

/// Fully parenthesized rendering that parses back to the same tree.
impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Query::Has(tag) => write!(f, "has {tag}"),
            Query::Compare { tag, op, value } => write!(f, "{tag} {} {value}", op.as_str()),
            Query::Matches { tag, text } => {
                write!(f, "{tag} matches ")?;
                write_quoted(f, text)
            }
            Query::Contains { tag, text } => {
                write!(f, "{tag} contains ")?;
                write_quoted(f, text)
            }
            Query::And(l, r) => write!(f, "({l} and {r})"),
            Query::Or(l, r) => write!(f, "({l} or {r})"),
            Query::Except(l, r) => write!(f, "({l} except {r})"),
        }
    }
}
