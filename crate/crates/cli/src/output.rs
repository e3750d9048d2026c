use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::Context as _;
use serde::Serialize;
use serde_json::{json, Value};

use crate::Cli;

/// A bad combination of flags; exits with status 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// A check that should never fail did; exits with status 3.
#[derive(Debug)]
pub struct AssertionFailure(pub String);

impl fmt::Display for AssertionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for AssertionFailure {}

pub fn classify(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 1;
        }
        if cause.is::<AssertionFailure>() {
            return 3;
        }
        if let Some(groupband::Error::Internal(_)) = cause.downcast_ref::<groupband::Error>() {
            return 3;
        }
    }
    2
}

pub const DEFAULT_OUT: &str = "groupband-out";

/// Settings shared by every subcommand.
pub struct Context {
    pub out: Option<PathBuf>,
    pub jobs: usize,
    pub reproducible: bool,
    pub argv: Vec<String>,
}

impl Context {
    pub fn new(cli: &Cli) -> Self {
        Context {
            out: cli.out.clone(),
            jobs: rayon::current_num_threads(),
            reproducible: cli.reproducible,
            argv: std::env::args().collect(),
        }
    }

    /// `--out` / `$GROUPBAND_OUT`, then `fallback`, then the default.
    pub fn out_dir(&self, fallback: Option<&Path>) -> anyhow::Result<PathBuf> {
        let dir = self
            .out
            .clone()
            .or_else(|| fallback.map(Path::to_path_buf))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        std::fs::create_dir_all(&dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(dir)
    }

    /// Writes `manifest.json`: the command line, the resolved settings and
    /// the files produced.
    pub fn write_manifest(&self, dir: &Path, command: &str, resolved: impl Serialize, outputs: &[PathBuf]) -> anyhow::Result<PathBuf> {
        let mut m = json!({
            "tool": "groupband",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "argv": self.argv,
            "jobs": self.jobs,
            "reproducible": self.reproducible,
            "output_dir": dir,
            "resolved": resolved,
            "outputs": outputs.iter().map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned())).collect::<Vec<_>>(),
        });
        if !self.reproducible {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs());
            m["created_unix"] = Value::from(secs);
        }
        let path = dir.join("manifest.json");
        write_text(&path, &(serde_json::to_string_pretty(&m)? + "\n"))?;
        Ok(path)
    }
}

pub fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// The error and its causes, leaving out causes already quoted by the
/// message above them.
pub fn render(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let msg = cause.to_string();
        if !out.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}
