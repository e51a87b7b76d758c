//! Random fixtures and queries for equivalence testing.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::ccl::{Scm, ThornMetadata};
use crate::model::{Action, Number, ObjectId, Path, PermissionPolicy, TagPath, TagValue, ADMIN_USER};
use crate::publish::ThornNode;
use crate::query::{CompareOp, Literal, Query};
use crate::store::Store;

pub const USERS: [&str; 3] = ["alice", "bob", "carol"];

const TAGS: [&str; 8] = [
    "alice/rating",
    "alice/notes",
    "alice/seen",
    "bob/rating",
    "bob/labels",
    "bob/secret",
    "carol/blob",
    "carol/mixed",
];

const WORDS: [&str; 8] = ["black", "star", "mesh", "driver", "carpet", "grid", "Star", "amr"];

pub fn tags() -> Vec<TagPath> {
    TAGS.iter().map(|t| TagPath::parse(t).unwrap()).collect()
}

fn sentence(rng: &mut impl Rng) -> String {
    let n = rng.gen_range(1..5);
    let seps = [" ", ", ", "-", "  "];
    (0..n)
        .map(|_| *WORDS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .iter()
        .enumerate()
        .fold(String::new(), |mut s, (i, w)| {
            if i > 0 {
                s.push_str(seps.choose(rng).unwrap());
            }
            s.push_str(w);
            s
        })
}

fn small_float(rng: &mut impl Rng) -> f64 {
    // Mostly halves and whole numbers so equality against integers happens.
    f64::from(rng.gen_range(-12i32..12)) / 2.0
}

pub fn random_value(rng: &mut impl Rng) -> TagValue {
    match rng.gen_range(0..9) {
        0 | 1 => TagValue::Integer(rng.gen_range(-5..=10)),
        2 => TagValue::Float(small_float(rng)),
        3 => TagValue::Boolean(rng.gen()),
        4 => TagValue::String(sentence(rng)),
        5 => TagValue::Null,
        6 => TagValue::string_set((0..rng.gen_range(0..4)).map(|_| *WORDS.choose(rng).unwrap())),
        7 => TagValue::opaque("application/octet-stream", vec![rng.gen(), rng.gen()]),
        _ => TagValue::opaque("application/json", b"[1,2]".to_vec()),
    }
}

/// Creates the fixture users (if missing) and `objects` objects carrying a
/// random mix of primitive and opaque instances. `bob/secret` is readable
/// by bob only.
pub fn populate(store: &Store, rng: &mut impl Rng, objects: usize) -> Vec<ObjectId> {
    for user in USERS {
        if store.user(user).is_none() {
            store.create_user(ADMIN_USER, user, &format!("{user}-token")).unwrap();
        }
    }
    let tags = tags();
    let mut ids = Vec::with_capacity(objects);
    for i in 0..objects {
        let about = format!("object-{i}");
        let id = store.create_object("alice", rng.gen_bool(0.5).then_some(about.as_str())).unwrap();
        for tag in &tags {
            if rng.gen_bool(0.45) {
                store.put_tag(tag.owner_namespace(), id, tag, random_value(rng)).unwrap();
            }
        }
        ids.push(id);
    }
    let secret = Path::parse("bob/secret").unwrap();
    if store.owner(&secret).is_some() {
        store
            .set_permission("bob", &secret, Action::Read, PermissionPolicy::closed_except(["bob"]))
            .unwrap();
    }
    ids
}

pub fn random_atom(rng: &mut impl Rng) -> Query {
    let mut all = tags();
    all.push(TagPath::parse("nobody/unknown").unwrap());
    let tag = all.choose(rng).unwrap().clone();
    match rng.gen_range(0..5) {
        0 => Query::Has(tag),
        1 => {
            let op = *CompareOp::ALL.choose(rng).unwrap();
            let n = if rng.gen_bool(0.6) {
                Number::Int(rng.gen_range(-6..=11))
            } else {
                Number::Float(small_float(rng))
            };
            Query::Compare { tag, op, value: Literal::Number(n) }
        }
        2 => {
            let op = if rng.gen() { CompareOp::Eq } else { CompareOp::Ne };
            Query::Compare { tag, op, value: Literal::Bool(rng.gen()) }
        }
        3 => {
            let text = if rng.gen_bool(0.7) {
                WORDS.choose(rng).unwrap().to_string()
            } else {
                sentence(rng)
            };
            Query::Matches { tag, text }
        }
        _ => Query::Contains { tag, text: WORDS.choose(rng).unwrap().to_string() },
    }
}

/// Random query tree of depth at most `max_depth` (atoms have depth 1).
pub fn random_query(rng: &mut impl Rng, max_depth: usize) -> Query {
    if max_depth <= 1 || rng.gen_bool(0.3) {
        return random_atom(rng);
    }
    let l = random_query(rng, max_depth - 1);
    let r = random_query(rng, max_depth - 1);
    match rng.gen_range(0..3) {
        0 => l.and(r),
        1 => l.or(r),
        _ => l.except(r),
    }
}

/// Arrangements used by [`synthetic_thorns`].
const ARRANGEMENTS: [&str; 12] = [
    "CactusBase",
    "CactusNumerical",
    "CactusUtils",
    "CactusIO",
    "Carpet",
    "EinsteinBase",
    "EinsteinAnalysis",
    "EinsteinEvolve",
    "EinsteinInitialData",
    "ExternalLibraries",
    "McLachlan",
    "PITTNullCode",
];

const AUTHORS: [&str; 5] = ["Erik Schnetter", "Gabrielle Allen", "Tom Goodale", "Ian Hinder", "Frank Loeffler"];

/// A deterministic toolkit of `n` thorns. Thorn `i` implements `iface<i>`
/// and inherits up to two interfaces of earlier thorns; arrangements share
/// one repository each, with the version-control system cycling.
pub fn synthetic_thorns(n: usize) -> Vec<ThornMetadata> {
    let scms = [Scm::Git, Scm::Svn, Scm::Git, Scm::Hg, Scm::Cvs, Scm::Darcs];
    (0..n)
        .map(|i| {
            let a = i % ARRANGEMENTS.len();
            let arrangement = ARRANGEMENTS[a].to_string();
            let inherits = [i / 2, i / 3].into_iter().filter(|&j| j < i).map(|j| format!("iface{j:03}"));
            ThornMetadata {
                url: format!("https://repos.example.org/{}.git", arrangement.to_lowercase()),
                scm: scms[a % scms.len()],
                arrangement,
                name: format!("Thorn{i:03}"),
                authors: vec![AUTHORS[i % AUTHORS.len()].to_string(), AUTHORS[(i + 2) % AUTHORS.len()].to_string()],
                description: format!("Synthetic thorn number {i}.\n\nIt exists for testing."),
                implements: vec![format!("iface{i:03}")],
                inherits: {
                    let mut v: Vec<String> = inherits.collect();
                    v.dedup();
                    v
                },
            }
        })
        .collect()
}

/// Writes thorn directories (`arrangements/<arr>/<thorn>` with interface.ccl
/// and README) under `root` and returns the matching manifest text.
pub fn write_thorn_tree(root: &std::path::Path, thorns: &[ThornMetadata]) -> std::io::Result<String> {
    let mut manifest = String::from("# synthetic thorns\n");
    for t in thorns {
        let dir = root.join("arrangements").join(&t.arrangement).join(&t.name);
        std::fs::create_dir_all(&dir)?;
        let mut interface = format!("# Interface definition for thorn {}\n", t.name);
        if !t.implements.is_empty() {
            interface.push_str(&format!("implements: {}\n", t.implements.join(" ")));
        }
        if !t.inherits.is_empty() {
            interface.push_str(&format!("inherits: {}\n", t.inherits.join(", ")));
        }
        std::fs::write(dir.join("interface.ccl"), interface)?;
        let readme = format!(
            "Cactus Code Thorn {}\nAuthor(s)    : {}\n{}\n\n{}\n",
            t.name,
            t.authors.join(", "),
            "-".repeat(72),
            t.description
        );
        std::fs::write(dir.join("README"), readme)?;
        manifest.push_str(&format!("{}/{} {} {}\n", t.arrangement, t.name, t.scm, t.url));
    }
    Ok(manifest)
}

fn fixture_thorn(about: &str, implements: &[&str], inherits: &[&str]) -> ThornMetadata {
    let (arrangement, name) = about.split_once('/').unwrap();
    ThornMetadata {
        arrangement: arrangement.into(),
        name: name.into(),
        authors: vec!["Erik Schnetter".into()],
        description: String::new(),
        implements: implements.iter().map(|s| s.to_string()).collect(),
        inherits: inherits.iter().map(|s| s.to_string()).collect(),
        scm: Scm::Git,
        url: format!("https://repos.example.org/{}.git", arrangement.to_lowercase()),
    }
}

/// Twenty thorns over six interfaces (`driver`, `grid`, `coordbase`, `io`,
/// `admbase`, `hydrobase`). Only `driver` has two providers: PUGH and the
/// toolkit member Carpet, which itself needs `io`. The flag says whether the
/// thorn is a toolkit member.
pub fn closure_fixture() -> Vec<(ThornMetadata, bool)> {
    vec![
        (fixture_thorn("CactusPUGH/PUGH", &["driver"], &[]), false),
        (fixture_thorn("Carpet/Carpet", &["driver"], &["io"]), true),
        (fixture_thorn("CactusBase/CartGrid3D", &["grid"], &["coordbase"]), true),
        (fixture_thorn("CactusBase/CoordBase", &["coordbase"], &[]), true),
        (fixture_thorn("CactusBase/IOUtil", &["io"], &[]), true),
        (fixture_thorn("EinsteinBase/ADMBase", &["admbase"], &["grid"]), true),
        (fixture_thorn("EinsteinBase/HydroBase", &["hydrobase"], &["grid"]), true),
        (fixture_thorn("McLachlan/ML_BSSN", &[], &["admbase"]), true),
        (fixture_thorn("McLachlan/ML_ADMConstraints", &[], &["admbase", "grid"]), true),
        (fixture_thorn("EinsteinAnalysis/AHFinderDirect", &[], &["admbase", "io"]), true),
        (fixture_thorn("EinsteinAnalysis/WeylScal4", &[], &["admbase"]), true),
        (fixture_thorn("EinsteinEvolve/GRHydro", &[], &["hydrobase", "admbase"]), true),
        (fixture_thorn("EinsteinInitialData/TOVSolver", &[], &["hydrobase"]), false),
        (fixture_thorn("CactusExamples/WaveToyC", &[], &["grid", "driver"]), false),
        (fixture_thorn("CactusIO/IOASCII", &[], &["io", "driver"]), true),
        (fixture_thorn("CactusUtils/NaNChecker", &[], &[]), true),
        (fixture_thorn("CactusUtils/TimerReport", &[], &["io"]), true),
        (fixture_thorn("CactusNumerical/MoL", &[], &[]), true),
        (fixture_thorn("CactusNumerical/Dissipation", &[], &["grid"]), false),
        (fixture_thorn("CactusExamples/HelloWorld", &[], &[]), false),
    ]
}

/// Interfaces inherited inside `set` that nothing in `set` implements.
fn unmet_interfaces(graph: &BTreeMap<String, ThornNode>, set: &BTreeSet<String>) -> usize {
    set.iter()
        .flat_map(|a| graph[a].inherits.iter())
        .filter(|i| !set.iter().any(|b| graph[b].implements.contains(*i)))
        .count()
}

pub fn closure_is_sound(graph: &BTreeMap<String, ThornNode>, set: &BTreeSet<String>) -> bool {
    unmet_interfaces(graph, set) == 0
}

/// No single member outside `base` can be dropped without leaving an
/// inherited interface unimplemented.
pub fn closure_is_minimal(graph: &BTreeMap<String, ThornNode>, set: &BTreeSet<String>, base: &BTreeSet<String>) -> bool {
    set.difference(base).all(|a| {
        let mut smaller = set.clone();
        smaller.remove(a);
        !closure_is_sound(graph, &smaller)
    })
}

/// Exhaustive reference resolver. Enumerates every superset of `base`
/// drawn from thorns that implement something, keeps those that are sound
/// and minimal, and returns the one preferred by: fewest non-toolkit
/// additions, then fewest additions, then smallest sorted list of added
/// about-values. `None` when no sound superset exists.
pub fn brute_force_closure(graph: &BTreeMap<String, ThornNode>, base: &[String]) -> Option<BTreeSet<String>> {
    let base: BTreeSet<String> = base.iter().cloned().collect();
    if base.iter().any(|a| !graph.contains_key(a)) {
        return None;
    }
    let candidates: Vec<&ThornNode> =
        graph.values().filter(|n| !n.implements.is_empty() && !base.contains(&n.about)).collect();
    assert!(candidates.len() <= 22, "brute force over {} candidates", candidates.len());
    type Ranked = ((usize, usize, Vec<String>), BTreeSet<String>);
    let mut best: Option<Ranked> = None;
    for mask in 0u32..(1 << candidates.len()) {
        let added: Vec<&ThornNode> =
            candidates.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, n)| *n).collect();
        let mut set = base.clone();
        set.extend(added.iter().map(|n| n.about.clone()));
        if !closure_is_sound(graph, &set) || !closure_is_minimal(graph, &set, &base) {
            continue;
        }
        let mut abouts: Vec<String> = added.iter().map(|n| n.about.clone()).collect();
        abouts.sort();
        let key = (added.iter().filter(|n| !n.toolkit).count(), added.len(), abouts);
        if best.as_ref().is_none_or(|(k, _)| key < *k) {
            best = Some((key, set));
        }
    }
    best.map(|(_, set)| set)
}

/// Thorn graph of [`closure_fixture`] as the resolver sees it.
pub fn closure_graph() -> BTreeMap<String, ThornNode> {
    closure_fixture()
        .into_iter()
        .map(|(m, toolkit)| {
            let node = ThornNode {
                about: m.about(),
                implements: m.implements.iter().cloned().collect(),
                inherits: m.inherits.iter().cloned().collect(),
                toolkit,
            };
            (node.about.clone(), node)
        })
        .collect()
}
