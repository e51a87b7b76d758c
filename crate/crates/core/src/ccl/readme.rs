use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadmeInfo {
    pub name: Option<String>,
    pub authors: Vec<String>,
    pub description: String,
    pub warnings: Vec<String>,
}

fn is_rule(line: &str) -> bool {
    line.contains("----------")
}

/// `Key : value` header line; returns the lowercased key and the value.
fn header_field(line: &str) -> Option<(String, &str)> {
    if line.starts_with(char::is_whitespace) {
        return None;
    }
    let (key, value) = line.split_once(':')?;
    let key = key.trim();
    if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || " ()_-".contains(c)) {
        return None;
    }
    Some((key.to_ascii_lowercase(), value))
}

fn is_author_key(key: &str) -> bool {
    matches!(key, "author" | "authors" | "author(s)")
}

/// Removes `<...>` email addresses and collapses runs of whitespace.
fn normalize_author(raw: &str) -> String {
    let mut out = String::new();
    let mut in_angle = false;
    for c in raw.chars() {
        match c {
            '<' => in_angle = true,
            '>' if in_angle => in_angle = false,
            _ if !in_angle => out.push(c),
            _ => {}
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Best-effort parse of a thorn README header and description.
pub fn parse_readme(text: &str) -> ReadmeInfo {
    let mut info = ReadmeInfo::default();
    let lines: Vec<&str> = text.lines().collect();
    let rule = lines.iter().position(|l| is_rule(l));
    let header = &lines[..rule.unwrap_or(lines.len())];

    let mut author_text: Option<String> = None;
    let mut in_authors = false;
    for line in header {
        let trimmed = line.trim();
        if info.name.is_none() {
            if let Some(rest) = strip_prefix_ci(trimmed, "cactus code thorn") {
                if let Some(name) = rest.split_whitespace().next() {
                    info.name = Some(name.to_string());
                    in_authors = false;
                    continue;
                }
            }
        }
        if let Some((key, value)) = header_field(line) {
            in_authors = is_author_key(&key) && author_text.is_none();
            if in_authors {
                author_text = Some(value.to_string());
            }
            continue;
        }
        if in_authors && line.starts_with(char::is_whitespace) && !trimmed.is_empty() {
            if let Some(acc) = author_text.as_mut() {
                acc.push(',');
                acc.push_str(trimmed);
            }
        } else {
            in_authors = false;
        }
    }

    if let Some(text) = author_text {
        for author in text.split(',').map(normalize_author).filter(|a| !a.is_empty()) {
            if !info.authors.contains(&author) {
                info.authors.push(author);
            }
        }
    }
    if let Some(i) = rule {
        info.description = lines[i + 1..].join("\n").trim().to_string();
    }

    if info.name.is_none() {
        info.warnings.push("README has no 'Cactus Code Thorn' header".into());
    }
    if info.authors.is_empty() {
        info.warnings.push("README lists no authors".into());
    }
    if rule.is_none() {
        info.warnings.push("README has no horizontal rule; description is empty".into());
    }
    info
}

fn strip_prefix_ci<'a>(s: &'a str, prefix: &str) -> Option<&'a str> {
    let head = s.get(..prefix.len())?;
    head.eq_ignore_ascii_case(prefix).then(|| &s[prefix.len()..])
}

#[cfg(test)]
mod tests {
    use super::*;

    const CARPET: &str = "\
Cactus Code Thorn Carpet
Author(s)    : Erik Schnetter <schnetter@example.org>
Maintainer(s): Erik Schnetter
Licence      : GPL
--------------------------------------------------------------------------

1. Purpose

This thorn provides a parallel AMR (adaptive mesh refinement) driver with
MPI.
";

    #[test]
    fn carpet_header() {
        let r = parse_readme(CARPET);
        assert_eq!(r.name.as_deref(), Some("Carpet"));
        assert_eq!(r.authors, ["Erik Schnetter"]);
        assert!(r.description.starts_with("1. Purpose\n\nThis thorn provides"));
        assert!(r.description.ends_with("MPI."));
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn no_rule_means_empty_description() {
        let r = parse_readme("Cactus Code Thorn X\nAuthor(s): A\nSome text\n");
        assert_eq!(r.description, "");
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn multiple_authors_and_continuations() {
        let r = parse_readme("Cactus Code Thorn Y\nAuthor(s)    : A. One, B. Two\n");
        assert_eq!(r.authors, ["A. One", "B. Two"]);
        let text = "\
Cactus Code Thorn Z
Author(s)    : Gabrielle Allen <g@x>,
               Tom   Goodale,
               Ian Hinder
Licence      : LGPL
----------
text";
        let r = parse_readme(text);
        assert_eq!(r.authors, ["Gabrielle Allen", "Tom Goodale", "Ian Hinder"]);
        assert_eq!(r.description, "text");
    }

    #[test]
    fn authors_without_trailing_comma_on_continuation() {
        let r = parse_readme("Author: A\n   B\nCVS info : x\n");
        assert_eq!(r.authors, ["A", "B"]);
        assert_eq!(r.name, None);
    }

    #[test]
    fn empty_text() {
        let r = parse_readme("");
        assert_eq!(r.name, None);
        assert!(r.authors.is_empty());
        assert_eq!(r.description, "");
        assert_eq!(r.warnings.len(), 3);
    }
}
