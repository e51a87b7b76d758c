use super::parser::{QueryError, QueryErrorKind};

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    LParen,
    RParen,
    Op(String),
    Quoted(String),
    Word(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// Byte offset into the query text.
    pub pos: usize,
}

fn op_char(c: char) -> bool {
    matches!(c, '=' | '<' | '>' | '!')
}

fn word_char(c: char) -> bool {
    !c.is_whitespace() && !op_char(c) && !matches!(c, '(' | ')' | '"')
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, QueryError> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        let kind = match c {
            c if c.is_whitespace() => {
                chars.next();
                continue;
            }
            '(' => {
                chars.next();
                TokenKind::LParen
            }
            ')' => {
                chars.next();
                TokenKind::RParen
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        None => return Err(QueryError::new(pos, QueryErrorKind::UnterminatedString)),
                        Some((_, '"')) => break,
                        Some((at, '\\')) => match chars.next() {
                            Some((_, e @ ('"' | '\\'))) => s.push(e),
                            _ => return Err(QueryError::new(at, QueryErrorKind::BadEscape)),
                        },
                        Some((_, ch)) => s.push(ch),
                    }
                }
                TokenKind::Quoted(s)
            }
            c if op_char(c) => {
                let mut s = String::new();
                while let Some(&(_, ch)) = chars.peek() {
                    if !op_char(ch) {
                        break;
                    }
                    s.push(ch);
                    chars.next();
                }
                TokenKind::Op(s)
            }
            _ => {
                let mut s = String::new();
                while let Some(&(_, ch)) = chars.peek() {
                    if !word_char(ch) {
                        break;
                    }
                    s.push(ch);
                    chars.next();
                }
                TokenKind::Word(s)
            }
        };
        tokens.push(Token { kind, pos });
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<TokenKind> {
        tokenize(text).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn splits_operators_without_spaces() {
        assert_eq!(
            kinds("eric/rating>=4"),
            [TokenKind::Word("eric/rating".into()), TokenKind::Op(">=".into()), TokenKind::Word("4".into())]
        );
        assert_eq!(
            kinds("(has a/b)"),
            [TokenKind::LParen, TokenKind::Word("has".into()), TokenKind::Word("a/b".into()), TokenKind::RParen]
        );
    }

    #[test]
    fn quoted_strings_with_escapes() {
        assert_eq!(kinds(r#""say \"hi\" \\ ok""#), [TokenKind::Quoted(r#"say "hi" \ ok"#.into())]);
        let err = tokenize(r#"a/b matches "open"#).unwrap_err();
        assert_eq!(err.kind, QueryErrorKind::UnterminatedString);
        assert_eq!(err.position, 12);
        assert_eq!(tokenize(r#""\n""#).unwrap_err().kind, QueryErrorKind::BadEscape);
    }
}
