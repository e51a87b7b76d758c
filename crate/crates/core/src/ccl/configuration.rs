use serde::{Deserialize, Serialize};

use super::{logical_lines, push_unique};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapabilityDeps {
    pub provides: Vec<String>,
    pub requires: Vec<String>,
    pub optional: Vec<String>,
}

/// Reads top-level `PROVIDES`, `REQUIRES` and `OPTIONAL` directives.
/// Brace-delimited blocks (script, language, options, defines) are skipped,
/// as are `REQUIRES THORNS:` lines and unknown directives.
pub fn parse_configuration_ccl(text: &str) -> CapabilityDeps {
    let mut deps = CapabilityDeps::default();
    let mut depth = 0usize;
    for line in logical_lines(text) {
        if depth == 0 {
            let head = line.split('{').next().unwrap_or_default();
            let mut words = head.split_whitespace();
            let target = match words.next().map(str::to_ascii_uppercase).as_deref() {
                Some("PROVIDES") => Some(&mut deps.provides),
                Some("REQUIRES") => Some(&mut deps.requires),
                Some("OPTIONAL") => Some(&mut deps.optional),
                _ => None,
            };
            if let Some(list) = target {
                let rest: Vec<&str> = words.collect();
                let thorns = rest.first().is_some_and(|w| w.trim_end_matches(':').eq_ignore_ascii_case("thorns"));
                if !thorns {
                    for name in rest {
                        push_unique(list, name.to_string());
                    }
                }
            }
        }
        for c in line.chars() {
            match c {
                '{' => depth += 1,
                '}' => depth = depth.saturating_sub(1),
                _ => {}
            }
        }
    }
    deps
}
