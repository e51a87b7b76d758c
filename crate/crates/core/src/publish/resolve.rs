use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

/// What the resolver needs to know about one thorn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThornNode {
    pub about: String,
    pub implements: BTreeSet<String>,
    pub inherits: BTreeSet<String>,
    /// Carries the toolkit-membership tag set to true.
    pub toolkit: bool,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ResolveError {
    #[error("unknown base thorn {0}")]
    UnknownThorn(String),
    #[error("interface {interface} (inherited by {needed_by}) has no usable provider")]
    Unresolved { interface: String, needed_by: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolution {
    /// The closed set, sorted by about-value.
    pub thorns: Vec<String>,
    /// Members that were not in the base set.
    pub added: Vec<String>,
    /// For every inherited interface, the preferred member implementing it.
    pub providers: BTreeMap<String, String>,
}

/// Provider preference: toolkit members first, then smallest about-value.
fn preference(node: &ThornNode) -> (bool, &str) {
    (!node.toolkit, node.about.as_str())
}

/// First inherited interface (in name order) with no implementation inside
/// `set`, and the smallest member that inherits it.
fn first_unmet<'a>(graph: &'a BTreeMap<String, ThornNode>, set: &BTreeSet<String>) -> Option<(&'a str, &'a str)> {
    let implemented: BTreeSet<&str> = set.iter().flat_map(|a| graph[a].implements.iter().map(String::as_str)).collect();
    let mut unmet: BTreeMap<&str, &str> = BTreeMap::new();
    for about in set {
        let node = &graph[about];
        for interface in &node.inherits {
            if !implemented.contains(interface.as_str()) {
                unmet.entry(interface.as_str()).or_insert(node.about.as_str());
            }
        }
    }
    unmet.into_iter().next()
}

fn sound(graph: &BTreeMap<String, ThornNode>, set: &BTreeSet<String>) -> bool {
    first_unmet(graph, set).is_none()
}

/// Thorns whose inherited interfaces can all be satisfied, transitively:
/// the largest set in which every inherited interface has a provider.
fn viable(graph: &BTreeMap<String, ThornNode>) -> BTreeSet<&str> {
    let mut set: BTreeSet<&str> = graph.keys().map(String::as_str).collect();
    loop {
        let implemented: BTreeSet<&str> =
            set.iter().flat_map(|a| graph[*a].implements.iter().map(String::as_str)).collect();
        let before = set.len();
        set.retain(|a| graph[*a].inherits.iter().all(|i| implemented.contains(i.as_str())));
        if set.len() == before {
            return set;
        }
    }
}

/// Closes `base` under inheritance.
///
/// Unmet interfaces are satisfied one at a time in name order, each by its
/// most preferred provider; a provider already in the set always counts as
/// satisfying, and providers whose own needs cannot be met are never
/// chosen. Because a later choice can make an earlier one redundant, a
/// final pass drops non-base members, least preferred first, whenever the
/// set stays closed without them. The result is therefore closed and no
/// single non-base member can be removed.
pub fn resolve_closure(graph: &BTreeMap<String, ThornNode>, base: &[String]) -> Result<Resolution, ResolveError> {
    let base: BTreeSet<String> = base.iter().cloned().collect();
    if let Some(missing) = base.iter().find(|a| !graph.contains_key(*a)) {
        return Err(ResolveError::UnknownThorn(missing.clone()));
    }
    let viable = viable(graph);
    for about in &base {
        if !viable.contains(about.as_str()) {
            let implemented: BTreeSet<&str> =
                viable.iter().flat_map(|a| graph[*a].implements.iter().map(String::as_str)).collect();
            let interface = graph[about].inherits.iter().find(|i| !implemented.contains(i.as_str())).expect("not viable");
            return Err(ResolveError::Unresolved { interface: interface.clone(), needed_by: about.clone() });
        }
    }
    let mut set = base.clone();
    while let Some((interface, needed_by)) = first_unmet(graph, &set) {
        let provider = viable
            .iter()
            .map(|a| &graph[*a])
            .filter(|n| n.implements.contains(interface))
            .min_by(|a, b| preference(a).cmp(&preference(b)))
            .ok_or_else(|| ResolveError::Unresolved { interface: interface.into(), needed_by: needed_by.into() })?;
        set.insert(provider.about.clone());
    }

    loop {
        let mut candidates: Vec<&ThornNode> = set.difference(&base).map(|a| &graph[a]).collect();
        candidates.sort_by(|a, b| preference(b).cmp(&preference(a)));
        let removable = candidates.into_iter().map(|n| n.about.clone()).find(|about| {
            let mut without = set.clone();
            without.remove(about);
            sound(graph, &without)
        });
        match removable {
            Some(about) => {
                set.remove(&about);
            }
            None => break,
        }
    }

    let mut providers = BTreeMap::new();
    for about in &set {
        for interface in &graph[about].inherits {
            let best = set
                .iter()
                .map(|a| &graph[a])
                .filter(|n| n.implements.contains(interface))
                .min_by(|a, b| preference(a).cmp(&preference(b)))
                .expect("closed set");
            providers.insert(interface.clone(), best.about.clone());
        }
    }
    Ok(Resolution {
        added: set.difference(&base).cloned().collect(),
        thorns: set.into_iter().collect(),
        providers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(about: &str, implements: &[&str], inherits: &[&str], toolkit: bool) -> ThornNode {
        ThornNode {
            about: about.into(),
            implements: implements.iter().map(|s| s.to_string()).collect(),
            inherits: inherits.iter().map(|s| s.to_string()).collect(),
            toolkit,
        }
    }

    fn graph(nodes: Vec<ThornNode>) -> BTreeMap<String, ThornNode> {
        nodes.into_iter().map(|n| (n.about.clone(), n)).collect()
    }

    #[test]
    fn single_driver_provider_is_added() {
        let g = graph(vec![
            node("CCTK:A/Wave", &["wave"], &["driver"], false),
            node("CCTK:Carpet/Carpet", &["driver"], &[], false),
            node("CCTK:A/Other", &["other"], &[], false),
        ]);
        let r = resolve_closure(&g, &["CCTK:A/Wave".into()]).unwrap();
        assert_eq!(r.thorns, ["CCTK:A/Wave", "CCTK:Carpet/Carpet"]);
        assert_eq!(r.added, ["CCTK:Carpet/Carpet"]);
        assert_eq!(r.providers["driver"], "CCTK:Carpet/Carpet");
    }

    #[test]
    fn empty_inherits_is_a_fixed_point() {
        let g = graph(vec![node("a", &["x"], &[], false), node("b", &["y"], &[], false)]);
        assert_eq!(resolve_closure(&g, &["a".into()]).unwrap().thorns, ["a"]);
    }

    #[test]
    fn toolkit_provider_preferred() {
        let g = graph(vec![
            node("base", &["b"], &["driver"], false),
            node("a-pugh", &["driver"], &[], false),
            node("z-carpet", &["driver"], &[], true),
        ]);
        assert_eq!(resolve_closure(&g, &["base".into()]).unwrap().added, ["z-carpet"]);
    }

    #[test]
    fn existing_member_satisfies() {
        let g = graph(vec![
            node("base", &["b"], &["driver"], false),
            node("p", &["driver"], &[], true),
            node("q", &["driver"], &[], false),
        ]);
        let r = resolve_closure(&g, &["base".into(), "q".into()]).unwrap();
        assert_eq!(r.thorns, ["base", "q"]);
    }

    #[test]
    fn redundant_earlier_choice_is_pruned() {
        // `x` is met first by `p`, then `y` forces `q`, which also implements `x`.
        let g = graph(vec![
            node("base", &[], &["x", "y"], false),
            node("p", &["x"], &[], true),
            node("q", &["x", "y"], &[], false),
        ]);
        assert_eq!(resolve_closure(&g, &["base".into()]).unwrap().thorns, ["base", "q"]);
    }

    #[test]
    fn provider_with_unmet_needs_is_skipped() {
        let g = graph(vec![
            node("base", &[], &["x"], false),
            node("broken", &["x"], &["missing"], true),
            node("plain", &["x"], &[], false),
        ]);
        assert_eq!(resolve_closure(&g, &["base".into()]).unwrap().added, ["plain"]);
    }

    #[test]
    fn errors() {
        let g = graph(vec![node("a", &[], &["nothing"], false)]);
        assert_eq!(
            resolve_closure(&g, &["a".into()]),
            Err(ResolveError::Unresolved { interface: "nothing".into(), needed_by: "a".into() })
        );
        assert_eq!(resolve_closure(&g, &["zz".into()]), Err(ResolveError::UnknownThorn("zz".into())));
    }
}
