//! Publisher command line: pushes Cactus thorn metadata into a fluidtag
//! service and derives thornlists and dependency closures from it.
//!
//! [`run`] holds the whole command so tests can drive it in-process.
//! Exit codes: 0 success, 1 usage or bad input, 2 service error,
//! 3 incomplete data.

mod http;

use std::fs;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};

use clap::{Parser, Subcommand};
use fluidtag_core::ccl::Manifest;
use fluidtag_core::model::{Path, TagPath, TagValue};
use fluidtag_core::publish::{
    default_prefixes, discover_authors, generate_thornlist, publish_tree, resolve_base_set, tag_membership,
    Catalog, CatalogError, PublishError, DEFAULT_NAMESPACE,
};
use fluidtag_core::{classify_value, RawValue};

pub use http::{decode_envelope, HttpCatalog};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SERVER: i32 = 2;
pub const EXIT_INCOMPLETE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "fluidtag", version, about = "Publish and query Cactus thorn metadata")]
struct Cli {
    /// Base URL of the fluidtag service.
    #[arg(long, global = true, env = "FLUIDTAG_SERVER", default_value = "http://127.0.0.1:8080")]
    server: String,
    /// Bearer token of the acting user.
    #[arg(long, global = true, env = "FLUIDTAG_TOKEN", hide_env_values = true)]
    token: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extract every thorn under a Cactus tree and publish its metadata.
    Publish {
        thorn_root: PathBuf,
        /// Lines of `<arrangement>/<thorn> <scm> <url>`.
        #[arg(long)]
        manifest: PathBuf,
        /// Namespace for the thorn tags (default `<user>/CCTK`).
        #[arg(long)]
        prefix: Option<String>,
    },
    /// Put one tag value on every object named in a file of about-values.
    TagMembership {
        tag: String,
        /// JSON literal (`true`, `3`, `"x"`); `True`/`False` are accepted and
        /// anything else is taken as a string.
        value: String,
        #[arg(long)]
        abouts: PathBuf,
    },
    /// Write a component retrieval list for the objects matching a query.
    Thornlist {
        #[arg(long)]
        query: String,
        /// Comma-separated tag prefixes in priority order (default: one per
        /// discovered author).
        #[arg(long, value_delimiter = ',')]
        prefixes: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Close a base set of thorns under interface inheritance.
    Resolve {
        /// Comma-separated about-values of the base thorns.
        #[arg(long, value_delimiter = ',', required = true)]
        base: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        prefixes: Vec<String>,
        /// Also print which thorn provides each inherited interface.
        #[arg(long)]
        providers: bool,
    },
    /// List users tagged as Cactus authors.
    Authors,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<PublishError> for Failure {
    fn from(e: PublishError) -> Self {
        let code = match &e {
            PublishError::Catalog(CatalogError::Invalid(_)) => EXIT_USAGE,
            PublishError::Catalog(_) => EXIT_SERVER,
            PublishError::Ccl(fluidtag_core::ccl::CclError::Io { .. }) => EXIT_USAGE,
            PublishError::Incomplete(_) | PublishError::Resolve(_) | PublishError::Crl(_) | PublishError::Ccl(_) => {
                EXIT_INCOMPLETE
            }
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<CatalogError> for Failure {
    fn from(e: CatalogError) -> Self {
        PublishError::from(e).into()
    }
}

fn read_file(path: &FsPath) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn parse_prefixes(catalog: &dyn Catalog, given: &[String]) -> Result<Vec<Path>, Failure> {
    if given.is_empty() {
        return Ok(default_prefixes(catalog)?);
    }
    given
        .iter()
        .map(|p| Path::parse(p).map_err(|e| Failure::usage(format!("prefix {p:?}: {e}"))))
        .collect()
}

/// Command-line value: JSON when it parses, booleans case-insensitively,
/// otherwise a plain string.
fn parse_value(text: &str) -> Result<TagValue, Failure> {
    let json = match text.to_ascii_lowercase().as_str() {
        "true" => serde_json::Value::Bool(true),
        "false" => serde_json::Value::Bool(false),
        _ => serde_json::from_str(text).unwrap_or_else(|_| serde_json::Value::String(text.to_string())),
    };
    classify_value(RawValue::Json(json)).map_err(|e| Failure::usage(e.to_string()))
}

fn lines(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.split_once('#').map_or(l, |(code, _)| code).trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let catalog = HttpCatalog::new(&cli.server, cli.token.as_deref())?;
    let io = |e: std::io::Error| Failure::usage(e.to_string());
    match cli.command {
        Command::Publish { thorn_root, manifest, prefix } => {
            let manifest = Manifest::parse(&read_file(&manifest)?).map_err(|e| Failure::usage(e.to_string()))?;
            let prefix = match prefix {
                Some(p) => Path::parse(&p).map_err(|e| Failure::usage(format!("prefix {p:?}: {e}")))?,
                None => {
                    let user = catalog.actor()?.ok_or(CatalogError::Unauthenticated)?;
                    Path::parse(&format!("{user}/{DEFAULT_NAMESPACE}")).map_err(|e| Failure::usage(e.to_string()))?
                }
            };
            let report = publish_tree(&catalog, &thorn_root, &manifest, &prefix)?;
            for warning in &report.warnings {
                writeln!(err, "warning: {warning}").map_err(io)?;
            }
            for (about, id) in &report.published {
                writeln!(out, "{about} {id}").map_err(io)?;
            }
            for problem in &report.incomplete {
                writeln!(err, "incomplete: {problem}").map_err(io)?;
            }
            Ok(if report.incomplete.is_empty() { EXIT_OK } else { EXIT_INCOMPLETE })
        }
        Command::TagMembership { tag, value, abouts } => {
            let tag = TagPath::parse(&tag).map_err(|e| Failure::usage(format!("tag {tag:?}: {e}")))?;
            let value = parse_value(&value)?;
            let abouts = lines(&read_file(&abouts)?);
            let result = tag_membership(&catalog, &abouts, &tag, &value)?;
            for about in &result.missing {
                writeln!(err, "missing: {about}").map_err(io)?;
            }
            for (about, e) in &result.failed {
                writeln!(err, "failed: {about}: {e}").map_err(io)?;
            }
            writeln!(out, "tagged {}", result.tagged.len()).map_err(io)?;
            Ok(if result.failed.is_empty() { EXIT_OK } else { EXIT_SERVER })
        }
        Command::Thornlist { query, prefixes, output } => {
            let prefixes = parse_prefixes(&catalog, &prefixes)?;
            let doc = generate_thornlist(&catalog, &query, &prefixes)?;
            match output {
                Some(path) => fs::write(&path, doc.render()).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?,
                None => out.write_all(doc.render().as_bytes()).map_err(io)?,
            }
            Ok(EXIT_OK)
        }
        Command::Resolve { base, prefixes, providers } => {
            let prefixes = parse_prefixes(&catalog, &prefixes)?;
            let resolution = resolve_base_set(&catalog, &base, &prefixes)?;
            for thorn in &resolution.thorns {
                writeln!(out, "{thorn}").map_err(io)?;
            }
            if providers {
                for (interface, thorn) in &resolution.providers {
                    writeln!(out, "# {interface} <- {thorn}").map_err(io)?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Authors => {
            let authors = discover_authors(&catalog)?;
            for id in &authors.skipped {
                writeln!(err, "warning: object {id} is tagged as an author but has no username").map_err(io)?;
            }
            for name in &authors.usernames {
                writeln!(out, "{name}").map_err(io)?;
            }
            Ok(EXIT_OK)
        }
    }
}

/// Runs the command line given by `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "fluidtag: {}", f.message);
            f.code
        }
    }
}
