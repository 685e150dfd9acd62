use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::{GlobalOpts, OUT_DIR_ENV};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] symlandscape::Error),
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 1 for bad input or unusable paths, 2 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if !e.is_invalid_input() => 2,
            _ => 1,
        }
    }
}

/// Metadata recorded next to every result.
#[derive(Debug, Serialize)]
pub struct RunMeta<'a, C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub global: &'a GlobalOpts,
    pub config: C,
}

/// Directory used for relative output paths: `$SYMLANDSCAPE_OUT` when set.
pub fn default_dir() -> Option<PathBuf> {
    std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

pub fn resolve(path: &Path) -> PathBuf {
    match default_dir() {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::Io(parent.to_path_buf(), e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

pub fn meta_json<C: Serialize>(command: &'static str, global: &GlobalOpts, config: C) -> String {
    let meta = RunMeta {
        tool: "symlandscape",
        version: env!("CARGO_PKG_VERSION"),
        command,
        global,
        config,
    };
    serde_json::to_string(&meta).expect("serializable metadata")
}

/// Destination of a command's primary result.
pub struct Output {
    meta: String,
    path: Option<PathBuf>,
}

impl Output {
    pub fn new<C: Serialize>(command: &'static str, global: &GlobalOpts, config: C, path: Option<PathBuf>) -> Self {
        Self {
            meta: meta_json(command, global, config),
            path: path.map(|p| resolve(&p)),
        }
    }

    /// Writes `text` to the output file plus a `<file>.meta.json` sidecar, or
    /// to `out` with the metadata as a `# meta` line on `err`.
    pub fn emit(&self, out: &mut dyn Write, err: &mut dyn Write, text: &str) -> Result<(), CliError> {
        match &self.path {
            Some(path) => {
                write_file(path, text)?;
                let mut sidecar = path.clone().into_os_string();
                sidecar.push(".meta.json");
                write_file(Path::new(&sidecar), &format!("{}\n", self.meta))
            }
            None => {
                write_stream(err, &format!("# meta {}\n", self.meta))?;
                write_stream(out, text)
            }
        }
    }
}

pub fn write_stream(stream: &mut dyn Write, text: &str) -> Result<(), CliError> {
    stream
        .write_all(text.as_bytes())
        .and_then(|_| stream.flush())
        .map_err(|e| CliError::Io(PathBuf::from("<stream>"), e))
}
