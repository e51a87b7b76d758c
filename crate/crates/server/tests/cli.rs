//! The publisher command line against a live server.

mod common;

use std::collections::BTreeMap;
use std::fs;

use common::{core_fixtures, token, TestServer};
use fluidtag_cli::{run, EXIT_INCOMPLETE, EXIT_OK, EXIT_SERVER, EXIT_USAGE};
use fluidtag_core::crl::{CrlDocument, CrlEntry};
use fluidtag_core::ccl::Manifest;
use fluidtag_core::{ObjectId, TagPath, TagValue};
use serde_json::json;

struct Output {
    code: i32,
    out: String,
    err: String,
}

fn cli(s: &TestServer, user: Option<&str>, args: &[&str]) -> Output {
    let mut argv = vec!["fluidtag".to_string(), "--server".into(), s.url.clone()];
    if let Some(u) = user {
        argv.push("--token".into());
        argv.push(token(u));
    }
    argv.extend(args.iter().map(|a| a.to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    Output { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn publish_fixtures(s: &TestServer, user: &str) -> Vec<(String, ObjectId)> {
    let root = core_fixtures().join("arrangements");
    let manifest = core_fixtures().join("manifest.txt");
    let o = cli(s, Some(user), &["publish", root.to_str().unwrap(), "--manifest", manifest.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    o.out
        .lines()
        .map(|l| {
            let (about, id) = l.split_once(' ').unwrap();
            (about.to_string(), id.parse().unwrap())
        })
        .collect()
}

fn snapshot(s: &TestServer) -> BTreeMap<(ObjectId, TagPath), TagValue> {
    let view = s.store.read();
    view.objects()
        .flat_map(|id| view.instances(id).map(move |(t, v)| ((id, t.clone()), v.clone())).collect::<Vec<_>>())
        .collect()
}

#[test]
fn publish_writes_the_fixture_tree() {
    let s = TestServer::start();
    let published = publish_fixtures(&s, "alice");
    assert_eq!(published.len(), 10);
    for (about, id) in &published {
        assert_eq!(s.store.object_by_about(about), Some(*id));
    }
    let carpet = s.store.object_by_about("CCTK:Carpet/Carpet").unwrap();
    let get = |t: &str| s.store.get_tag(None, carpet, &TagPath::parse(t).unwrap()).unwrap();
    assert_eq!(get("alice/CCTK/arrangement"), TagValue::String("Carpet".into()));
    assert_eq!(get("alice/CCTK/scm"), TagValue::String("git".into()));
    assert_eq!(get("alice/CCTK/implements"), TagValue::string_set(["driver"]));

    // Publishing again changes nothing.
    let before = snapshot(&s);
    assert_eq!(publish_fixtures(&s, "alice"), published);
    assert_eq!(snapshot(&s), before);
}

#[test]
fn publish_reports_warnings_and_incomplete_thorns() {
    let s = TestServer::start();
    let tmp = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(core_fixtures().join("manifest.txt")).unwrap();
    let partial: String = text.lines().filter(|l| !l.starts_with("Carpet/")).map(|l| format!("{l}\n")).collect();
    let manifest = tmp.path().join("partial.txt");
    fs::write(&manifest, partial).unwrap();
    let root = core_fixtures().join("arrangements");
    let o = cli(&s, Some("alice"), &["publish", root.to_str().unwrap(), "--manifest", manifest.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_INCOMPLETE);
    assert_eq!(o.out.lines().count(), 9);
    assert!(o.err.contains("incomplete:") && o.err.contains("Carpet"), "{}", o.err);
    assert!(o.err.contains("warning:") && o.err.contains("WaveToyC"), "{}", o.err);
    assert!(s.store.object_by_about("CCTK:Carpet/Carpet").is_none());

    // Missing manifest file, unreadable manifest, unknown prefix owner.
    let o = cli(&s, Some("alice"), &["publish", root.to_str().unwrap(), "--manifest", "/no/such/file"]);
    assert_eq!(o.code, EXIT_USAGE);
    fs::write(&manifest, "Carpet/Carpet\n").unwrap();
    let o = cli(&s, Some("alice"), &["publish", root.to_str().unwrap(), "--manifest", manifest.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_USAGE, "{}", o.err);
}

#[test]
fn publish_needs_identity_and_rights() {
    let s = TestServer::start();
    let root = core_fixtures().join("arrangements");
    let manifest = core_fixtures().join("manifest.txt");
    let args = ["publish", root.to_str().unwrap(), "--manifest", manifest.to_str().unwrap()];
    assert_eq!(cli(&s, None, &args).code, EXIT_SERVER);

    let mut foreign = args.to_vec();
    foreign.extend(["--prefix", "alice/CCTK"]);
    let o = cli(&s, Some("bob"), &foreign);
    assert_eq!(o.code, EXIT_SERVER, "{}", o.err);
    let view = s.store.read();
    assert!(view.objects().all(|id| view.instances(id).all(|(t, _)| !t.to_string().contains("/CCTK/"))));
}

#[test]
fn membership_thornlist_and_authors() {
    let s = TestServer::start();
    publish_fixtures(&s, "alice");
    let tmp = tempfile::tempdir().unwrap();
    let abouts = tmp.path().join("abouts.txt");
    fs::write(&abouts, "# toolkit members\nCCTK:Carpet/Carpet\nCCTK:CactusBase/IOUtil  # io\n\nCCTK:EinsteinBase/ADMBase\nCCTK:Nowhere/Ghost\n").unwrap();

    let tag = "einsteintoolkit.org/includes";
    let o = cli(&s, Some("einsteintoolkit.org"), &["tag-membership", tag, "True", "--abouts", abouts.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    assert_eq!(o.out, "tagged 3\n");
    assert_eq!(o.err, "missing: CCTK:Nowhere/Ghost\n");
    let o = cli(&s, Some("alice"), &["tag-membership", tag, "true", "--abouts", abouts.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_SERVER);
    let o = cli(&s, Some("alice"), &["tag-membership", "bad", "true", "--abouts", abouts.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_USAGE);

    // Thornlist to a file, with explicit prefixes.
    let crl = tmp.path().join("toolkit.th");
    let query = format!("{tag} = True");
    let o = cli(&s, None, &["thornlist", "--query", &query, "--prefixes", "bob/CCTK,alice/CCTK", "-o", crl.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    let text = fs::read_to_string(&crl).unwrap();
    let doc = CrlDocument::parse(&text).unwrap();
    let manifest = Manifest::parse(&fs::read_to_string(core_fixtures().join("manifest.txt")).unwrap()).unwrap();
    let expected: Vec<CrlEntry> = ["Carpet/Carpet", "CactusBase/IOUtil", "EinsteinBase/ADMBase"]
        .iter()
        .map(|key| {
            let (arr, name) = key.split_once('/').unwrap();
            let entry = manifest.get(arr, name).unwrap();
            CrlEntry::new(arr, name, entry.scm, entry.url.as_str())
        })
        .collect();
    assert_eq!(CrlDocument::new(expected).unwrap(), doc);
    assert_eq!(doc.to_string(), text);

    // Without prefixes and with no tagged authors, the caller's own prefix.
    let o = cli(&s, Some("alice"), &["thornlist", "--query", &query]);
    assert_eq!((o.code, o.out.as_str()), (EXIT_OK, text.as_str()));
    // bob/CCTK carries nothing, so every match is incomplete.
    let o = cli(&s, Some("bob"), &["thornlist", "--query", &query]);
    assert_eq!(o.code, EXIT_INCOMPLETE);
    assert!(o.out.is_empty() && o.err.contains("CCTK:Carpet/Carpet"), "{}", o.err);

    // Tagging alice as an author makes alice/CCTK the default for everyone.
    assert_eq!(cli(&s, None, &["authors"]).out, "");
    let alice = s.store.user("alice").unwrap().object;
    let r = s.put_json(Some("cactuscode.org"), &format!("/objects/{alice}/cactuscode.org/author"), &json!(true));
    assert!(r.status().is_success());
    let o = cli(&s, None, &["authors"]);
    assert_eq!((o.code, o.out.as_str()), (EXIT_OK, "alice\n"));
    let o = cli(&s, Some("bob"), &["thornlist", "--query", &query]);
    assert_eq!(o.out, text);

    // A bad query is the caller's fault.
    let o = cli(&s, None, &["thornlist", "--query", "has", "--prefixes", "alice/CCTK"]);
    assert_eq!(o.code, EXIT_USAGE, "{}", o.err);
}

#[test]
fn resolve_closes_base_sets() {
    let s = TestServer::start();
    publish_fixtures(&s, "alice");
    let o = cli(&s, None, &["resolve", "--base", "CCTK:EinsteinBase/ADMBase", "--prefixes", "alice/CCTK", "--providers"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    assert_eq!(
        o.out,
        "CCTK:CactusBase/CartGrid3D\nCCTK:CactusBase/CoordBase\nCCTK:EinsteinBase/ADMBase\n\
         # coordbase <- CCTK:CactusBase/CoordBase\n# grid <- CCTK:CactusBase/CartGrid3D\n"
    );
    let o = cli(&s, None, &["resolve", "--base", "CCTK:CactusExamples/WaveToy,CCTK:CactusBase/IOUtil", "--prefixes", "alice/CCTK"]);
    assert_eq!(o.out, "CCTK:CactusBase/CartGrid3D\nCCTK:CactusBase/CoordBase\nCCTK:CactusBase/IOUtil\nCCTK:CactusExamples/WaveToy\n");

    // ML_BSSN inherits interfaces no published thorn implements.
    let o = cli(&s, None, &["resolve", "--base", "CCTK:McLachlan/ML_BSSN", "--prefixes", "alice/CCTK"]);
    assert_eq!(o.code, EXIT_INCOMPLETE);
    assert!(o.err.contains("genericfd") || o.err.contains("tmunubase"), "{}", o.err);
    let o = cli(&s, None, &["resolve", "--base", "CCTK:No/Such", "--prefixes", "alice/CCTK"]);
    assert_eq!(o.code, EXIT_INCOMPLETE);
}

#[test]
fn usage_and_connection_errors() {
    let s = TestServer::start();
    assert_eq!(cli(&s, None, &["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(cli(&s, None, &["resolve"]).code, EXIT_USAGE);
    assert_eq!(cli(&s, None, &["--help"]).code, EXIT_OK);

    let dead = {
        let l = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap()
    };
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(["fluidtag", "--server", &format!("http://{dead}"), "authors"], &mut out, &mut err);
    assert_eq!(code, EXIT_SERVER);
    assert!(!err.is_empty());
}
