//! Run directories, manifests and error records.

use std::path::{Path, PathBuf};
use std::time::Instant;

use brmeans::Error;
use serde::Serialize;
use serde_json::{json, Value};

/// A failure on its way to the process exit status.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn missing(field: &'static str) -> CliError {
    CliError::Lib(Error::invalid(field, "required"))
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(Error::Budget { .. }) => 3,
            CliError::Lib(Error::Io { .. }) => 4,
            CliError::Lib(_) => 2,
        }
    }

    /// One-line JSON record.
    pub fn record(&self) -> String {
        let value = match self {
            CliError::Usage(msg) => json!({"status": "error", "kind": "usage", "message": msg}),
            CliError::Lib(e) => {
                let (kind, field) = match e {
                    Error::InvalidParameter { field, .. } => ("validation", Some(*field)),
                    Error::Domain(_) => ("domain", None),
                    Error::Budget { .. } => ("budget", None),
                    Error::Overflow(_) => ("overflow", None),
                    Error::Format(_) => ("format", None),
                    Error::Io { .. } => ("io", None),
                };
                let mut v = json!({"status": "error", "kind": kind, "message": e.to_string()});
                if let Some(field) = field {
                    v["field"] = json!(field);
                }
                if let Error::Io { path, .. } = e {
                    v["path"] = json!(path.display().to_string());
                }
                v
            }
        };
        value.to_string()
    }
}

/// One output directory per run, named `<command>-<timestamp>-seed<seed>`.
pub struct Run {
    pub dir: PathBuf,
    command: &'static str,
    seed: Option<u64>,
    started: chrono::DateTime<chrono::Utc>,
    clock: Instant,
    outputs: Vec<String>,
}

impl Run {
    pub fn create(root: &Path, command: &'static str, seed: Option<u64>) -> CliResult<Run> {
        std::fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        let started = chrono::Utc::now();
        let stamp = started.format("%Y%m%dT%H%M%S%.3fZ");
        let base = match seed {
            Some(s) => format!("{command}-{stamp}-seed{s}"),
            None => format!("{command}-{stamp}"),
        };
        let mut dir = root.join(&base);
        let mut suffix = 1;
        loop {
            match std::fs::create_dir(&dir) {
                Ok(()) => break,
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                    dir = root.join(format!("{base}-{suffix}"));
                    suffix += 1;
                }
                Err(e) => return Err(Error::io(&dir, e).into()),
            }
        }
        Ok(Run {
            dir,
            command,
            seed,
            started,
            clock: Instant::now(),
            outputs: Vec::new(),
        })
    }

    /// Path of an output file, recorded in the manifest.
    pub fn output(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.dir.join(name)
    }

    pub fn finish<C: Serialize>(self, config: &C, summary: Value) -> CliResult<PathBuf> {
        let manifest = json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": self.seed,
            "started": self.started.to_rfc3339(),
            "runtime_seconds": self.clock.elapsed().as_secs_f64(),
            "config": config,
            "outputs": self.outputs,
            "summary": summary,
        });
        let path = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(self.dir)
    }
}
