use std::fmt;

use thiserror::Error;

use super::ast::{CompareOp, Literal, Query};
use super::lexer::{tokenize, Token, TokenKind};
use crate::model::{Number, TagPath};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryErrorKind {
    Empty,
    UnexpectedEnd,
    UnexpectedToken(String),
    UnknownOperator(String),
    UnbalancedParen,
    InvalidPath(String),
    InvalidNumber(String),
    /// Literal that does not fit the operator, e.g. `t < true`.
    InvalidOperand(String),
    EmptyOperand,
    UnterminatedString,
    BadEscape,
}

impl fmt::Display for QueryErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryErrorKind::Empty => f.write_str("empty query"),
            QueryErrorKind::UnexpectedEnd => f.write_str("unexpected end of query"),
            QueryErrorKind::UnexpectedToken(t) => write!(f, "unexpected {t:?}"),
            QueryErrorKind::UnknownOperator(t) => write!(f, "unknown operator {t:?}"),
            QueryErrorKind::UnbalancedParen => f.write_str("unbalanced parenthesis"),
            QueryErrorKind::InvalidPath(e) => write!(f, "invalid tag path: {e}"),
            QueryErrorKind::InvalidNumber(t) => write!(f, "invalid number {t:?}"),
            QueryErrorKind::InvalidOperand(t) => write!(f, "invalid operand {t:?}"),
            QueryErrorKind::EmptyOperand => f.write_str("empty text operand"),
            QueryErrorKind::UnterminatedString => f.write_str("unterminated string"),
            QueryErrorKind::BadEscape => f.write_str("bad escape sequence"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("query syntax error at offset {position}: {kind}")]
pub struct QueryError {
    pub position: usize,
    pub kind: QueryErrorKind,
}

impl QueryError {
    pub(crate) fn new(position: usize, kind: QueryErrorKind) -> Self {
        QueryError { position, kind }
    }
}

pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(QueryError::new(0, QueryErrorKind::Empty));
    }
    let mut parser = Parser { tokens, next: 0, end: text.len() };
    let query = parser.or_expr()?;
    match parser.peek() {
        None => Ok(query),
        Some(Token { kind: TokenKind::RParen, pos }) => {
            Err(QueryError::new(*pos, QueryErrorKind::UnbalancedParen))
        }
        Some(tok) => Err(parser.unexpected(tok)),
    }
}

struct Parser {
    tokens: Vec<Token>,
    next: usize,
    end: usize,
}

fn describe(kind: &TokenKind) -> String {
    match kind {
        TokenKind::LParen => "(".into(),
        TokenKind::RParen => ")".into(),
        TokenKind::Op(s) | TokenKind::Word(s) => s.clone(),
        TokenKind::Quoted(s) => format!("\"{s}\""),
    }
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.next)
    }

    fn bump(&mut self) -> Result<Token, QueryError> {
        let tok = self.tokens.get(self.next).cloned();
        self.next += 1;
        tok.ok_or(QueryError::new(self.end, QueryErrorKind::UnexpectedEnd))
    }

    fn unexpected(&self, tok: &Token) -> QueryError {
        QueryError::new(tok.pos, QueryErrorKind::UnexpectedToken(describe(&tok.kind)))
    }

    fn peek_keyword(&self, words: &[&str]) -> Option<String> {
        match self.peek() {
            Some(Token { kind: TokenKind::Word(w), .. }) => {
                let lower = w.to_ascii_lowercase();
                words.contains(&lower.as_str()).then_some(lower)
            }
            _ => None,
        }
    }

    fn or_expr(&mut self) -> Result<Query, QueryError> {
        let mut left = self.and_expr()?;
        while self.peek_keyword(&["or"]).is_some() {
            self.next += 1;
            let right = self.and_expr()?;
            left = left.or(right);
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> Result<Query, QueryError> {
        let mut left = self.unary()?;
        while let Some(kw) = self.peek_keyword(&["and", "except"]) {
            self.next += 1;
            let right = self.unary()?;
            left = if kw == "and" { left.and(right) } else { left.except(right) };
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Query, QueryError> {
        let tok = self.bump()?;
        match tok.kind {
            TokenKind::LParen => {
                let inner = self.or_expr()?;
                match self.peek() {
                    Some(Token { kind: TokenKind::RParen, .. }) => {
                        self.next += 1;
                        Ok(inner)
                    }
                    None => Err(QueryError::new(tok.pos, QueryErrorKind::UnbalancedParen)),
                    Some(other) => Err(self.unexpected(other)),
                }
            }
            TokenKind::Word(ref w) if w.eq_ignore_ascii_case("has") => {
                let path = self.bump()?;
                Ok(Query::Has(self.path(&path)?))
            }
            TokenKind::Word(_) => self.atom(tok),
            TokenKind::RParen => Err(QueryError::new(tok.pos, QueryErrorKind::UnbalancedParen)),
            _ => Err(self.unexpected(&tok)),
        }
    }

    fn path(&self, tok: &Token) -> Result<TagPath, QueryError> {
        match &tok.kind {
            TokenKind::Word(w) => TagPath::parse(w)
                .map_err(|e| QueryError::new(tok.pos, QueryErrorKind::InvalidPath(e.to_string()))),
            _ => Err(self.unexpected(tok)),
        }
    }

    fn atom(&mut self, first: Token) -> Result<Query, QueryError> {
        let tag = self.path(&first)?;
        let op = self.bump()?;
        match &op.kind {
            TokenKind::Op(sym) => {
                let cmp = CompareOp::from_symbol(sym)
                    .ok_or_else(|| QueryError::new(op.pos, QueryErrorKind::UnknownOperator(sym.clone())))?;
                let value = self.literal(cmp)?;
                Ok(Query::Compare { tag, op: cmp, value })
            }
            TokenKind::Word(w) if w.eq_ignore_ascii_case("matches") => {
                Ok(Query::Matches { tag, text: self.text_operand()? })
            }
            TokenKind::Word(w) if w.eq_ignore_ascii_case("contains") => {
                Ok(Query::Contains { tag, text: self.text_operand()? })
            }
            TokenKind::Word(w) => Err(QueryError::new(op.pos, QueryErrorKind::UnknownOperator(w.clone()))),
            _ => Err(self.unexpected(&op)),
        }
    }

    fn literal(&mut self, op: CompareOp) -> Result<Literal, QueryError> {
        let tok = self.bump()?;
        let TokenKind::Word(w) = &tok.kind else {
            return Err(self.unexpected(&tok));
        };
        let boolean = match w.to_ascii_lowercase().as_str() {
            "true" => Some(true),
            "false" => Some(false),
            _ => None,
        };
        if let Some(b) = boolean {
            return match op {
                CompareOp::Eq | CompareOp::Ne => Ok(Literal::Bool(b)),
                _ => Err(QueryError::new(tok.pos, QueryErrorKind::InvalidOperand(w.clone()))),
            };
        }
        parse_number(w)
            .map(Literal::Number)
            .ok_or_else(|| QueryError::new(tok.pos, QueryErrorKind::InvalidNumber(w.clone())))
    }

    fn text_operand(&mut self) -> Result<String, QueryError> {
        let tok = self.bump()?;
        match tok.kind {
            TokenKind::Quoted(s) | TokenKind::Word(s) if !s.is_empty() => Ok(s),
            TokenKind::Quoted(_) => Err(QueryError::new(tok.pos, QueryErrorKind::EmptyOperand)),
            _ => Err(self.unexpected(&tok)),
        }
    }
}

/// Integer tokens (optional `-`, digits) become integers when they fit in
/// `i64`; anything else numeric becomes a finite float.
fn parse_number(text: &str) -> Option<Number> {
    let digits = text.strip_prefix('-').unwrap_or(text);
    if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
        if let Ok(i) = text.parse::<i64>() {
            return Some(Number::Int(i));
        }
    }
    let shaped = digits.bytes().next().is_some_and(|b| b.is_ascii_digit() || b == b'.')
        && text.bytes().any(|b| b.is_ascii_digit())
        && text.bytes().all(|b| b.is_ascii_digit() || b"+-.eE".contains(&b));
    if !shaped {
        return None;
    }
    text.parse::<f64>().ok().and_then(Number::float)
}
