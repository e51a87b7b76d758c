//! Splitting `/about/<about>/<tag>` request paths.
//!
//! About-values may contain `/` (`CCTK:Carpet/Carpet`). A client that
//! percent-encodes them as `%2F` gets an exact split: the first raw segment
//! is the about-value. Otherwise the tag is taken to start at the first
//! later segment naming an existing user, since every tag lives under a
//! user's namespace.

use fluidtag_core::TagPath;
use percent_encoding::percent_decode_str;

use crate::error::{ApiError, ApiResult};

#[derive(Debug, PartialEq, Eq)]
pub struct AboutTarget {
    pub about: String,
    pub tag: Option<TagPath>,
}

fn decode(raw: &str) -> ApiResult<String> {
    percent_decode_str(raw)
        .decode_utf8()
        .map(|s| s.into_owned())
        .map_err(|_| ApiError::bad_request("path is not valid UTF-8"))
}

/// `rest` is the raw (still percent-encoded) path after `/about/`.
pub fn split_about_path(rest: &str, is_user: impl Fn(&str) -> bool) -> ApiResult<AboutTarget> {
    let segments: Vec<&str> = rest.split('/').collect();
    if segments[0].is_empty() {
        return Err(ApiError::bad_request("missing about-value"));
    }
    let first_encoded = segments[0].contains("%2F") || segments[0].contains("%2f");
    let split = if first_encoded {
        1
    } else {
        segments
            .iter()
            .enumerate()
            .skip(1)
            .find(|(_, s)| decode(s).is_ok_and(|s| is_user(&s)))
            .map_or(segments.len(), |(i, _)| i)
    };
    let about = decode(&segments[..split].join("/"))?;
    let tail: Vec<&str> = segments[split..].iter().copied().filter(|s| !s.is_empty()).collect();
    let tag = if tail.is_empty() {
        None
    } else {
        Some(TagPath::parse(&decode(&tail.join("/"))?)?)
    };
    Ok(AboutTarget { about, tag })
}
