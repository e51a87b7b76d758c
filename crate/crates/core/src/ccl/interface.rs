use serde::{Deserialize, Serialize};

use super::{logical_lines, push_unique, CclError};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterfaceDecl {
    pub implements: Vec<String>,
    pub inherits: Vec<String>,
    pub friends: Vec<String>,
    pub warnings: Vec<String>,
}

/// `keyword: rest` with a case-insensitive keyword.
fn directive<'a>(line: &'a str, keyword: &str) -> Option<&'a str> {
    let line = line.trim_start();
    let head = line.get(..keyword.len())?;
    if !head.eq_ignore_ascii_case(keyword) {
        return None;
    }
    line[keyword.len()..].trim_start().strip_prefix(':')
}

fn names(rest: &str) -> impl Iterator<Item = String> + '_ {
    rest.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|n| !n.is_empty())
        .map(str::to_ascii_lowercase)
}

/// Reads the `implements`, `inherits` and `friend` declarations. Everything
/// else (variable groups, aliased functions, includes) is ignored.
pub fn parse_interface_ccl(text: &str) -> Result<InterfaceDecl, CclError> {
    let mut decl = InterfaceDecl::default();
    let mut implements_lines = 0;
    for line in logical_lines(text) {
        if let Some(rest) = directive(&line, "implements") {
            implements_lines += 1;
            if implements_lines > 1 {
                return Err(CclError::MalformedInterface("more than one implements line".into()));
            }
            for n in names(rest) {
                push_unique(&mut decl.implements, n);
            }
        } else if let Some(rest) = directive(&line, "inherits") {
            for n in names(rest) {
                push_unique(&mut decl.inherits, n);
            }
        } else if let Some(rest) = directive(&line, "friend") {
            for n in names(rest) {
                push_unique(&mut decl.friends, n);
            }
        }
    }
    if decl.implements.is_empty() {
        decl.warnings.push("interface.ccl declares no implemented interface".into());
    }
    Ok(decl)
}
