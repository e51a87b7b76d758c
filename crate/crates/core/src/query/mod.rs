//! Query language: presence (`has t`), numeric comparison (`t > 4`), textual
//! (`t matches word`), set contents (`t contains word`), combined with
//! `and`, `or`, `except` and parentheses.
//!
//! `and` and `except` bind tighter than `or`; operators of equal strength
//! associate to the left. Keywords are case-insensitive, tag paths are not.
//! Besides numbers, `=` and `!=` also accept `true`/`false`.

mod ast;
mod eval;
mod lexer;
mod oracle;
mod parser;

pub use ast::{CompareOp, Literal, Query};
pub use eval::eval_query;
pub use oracle::brute_force_eval;
pub use parser::{parse_query, QueryError, QueryErrorKind};

pub fn render_query(query: &Query) -> String {
    query.to_string()
}

#[cfg(test)]
mod tests;
