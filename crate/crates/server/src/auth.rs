use std::collections::BTreeMap;

use axum::extract::FromRequestParts;
use axum::http::header::AUTHORIZATION;
use axum::http::request::Parts;

use crate::error::ApiError;
use crate::AppState;

/// The authenticated caller, if a bearer token was presented. A token that
/// matches no user is rejected outright rather than treated as anonymous.
#[derive(Debug, Clone)]
pub struct Actor(pub Option<String>);

impl Actor {
    pub fn name(&self) -> Option<&str> {
        self.0.as_deref()
    }

    pub fn required(&self) -> Result<&str, ApiError> {
        self.name().ok_or_else(ApiError::unauthenticated)
    }
}

impl FromRequestParts<AppState> for Actor {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, Self::Rejection> {
        let Some(header) = parts.headers.get(AUTHORIZATION) else {
            return Ok(Actor(None));
        };
        let token = header
            .to_str()
            .ok()
            .and_then(|h| h.strip_prefix("Bearer ").or_else(|| h.strip_prefix("bearer ")))
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .ok_or_else(ApiError::unauthenticated)?;
        state.store.authenticate(token).map(|u| Actor(Some(u))).ok_or_else(ApiError::unauthenticated)
    }
}

/// Parses a credential file: one `<username> <token>` pair per line,
/// `#` comments and blank lines ignored.
pub fn parse_credentials(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut users = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split_once('#').map_or(line, |(code, _)| code).trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [user, token] = fields[..] else {
            return Err(format!("line {}: expected '<username> <token>'", i + 1));
        };
        if users.insert(user.to_string(), token.to_string()).is_some() {
            return Err(format!("line {}: duplicate user {user}", i + 1));
        }
    }
    Ok(users)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn credential_file() {
        let users = parse_credentials("# users\nadmin s3cret\n\nalice  a-token # comment\n").unwrap();
        assert_eq!(users.len(), 2);
        assert_eq!(users["alice"], "a-token");
        assert!(parse_credentials("alice").is_err());
        assert!(parse_credentials("alice a b").is_err());
        assert!(parse_credentials("alice a\nalice b").is_err());
    }
}
