//! Report documents and atomic output.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

pub const SCHEMA: u32 = 1;
pub const OUTPUT_DIR_ENV: &str = "GAUSSMEAN_OUTPUT_DIR";

#[derive(Debug, Serialize)]
pub struct Metadata {
    pub command: Vec<String>,
    pub version: &'static str,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl Metadata {
    pub fn new(command: Vec<String>) -> Self {
        Self {
            command,
            version: env!("CARGO_PKG_VERSION"),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ReportDocument<P: Serialize> {
    pub schema: u32,
    pub metadata: Metadata,
    pub tolerances: serde_json::Value,
    pub payload: P,
}

impl<P: Serialize> ReportDocument<P> {
    pub fn new(command: Vec<String>, tolerances: serde_json::Value, payload: P) -> Self {
        Self {
            schema: SCHEMA,
            metadata: Metadata::new(command),
            tolerances,
            payload,
        }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Where the rendered report goes.
pub enum Sink {
    Stdout,
    File(PathBuf),
}

impl Sink {
    /// Explicit path, else `$GAUSSMEAN_OUTPUT_DIR/<stem>.<ext>`, else stdout.
    pub fn resolve(explicit: Option<PathBuf>, stem: &str, ext: &str) -> Self {
        match explicit {
            Some(p) if p.as_os_str() == "-" => Sink::Stdout,
            Some(p) => Sink::File(p),
            None => match std::env::var_os(OUTPUT_DIR_ENV) {
                Some(dir) if !dir.is_empty() => {
                    Sink::File(Path::new(&dir).join(format!("{stem}.{ext}")))
                }
                _ => Sink::Stdout,
            },
        }
    }

    /// Writes through a temporary file in the target directory and renames
    /// it into place, so a failed run never leaves a partial report.
    pub fn write(&self, contents: &str, stdout: &mut dyn Write) -> std::io::Result<()> {
        match self {
            Sink::Stdout => {
                stdout.write_all(contents.as_bytes())?;
                stdout.flush()
            }
            Sink::File(path) => {
                let dir = match path.parent() {
                    Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
                    _ => PathBuf::from("."),
                };
                std::fs::create_dir_all(&dir)?;
                let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
                tmp.write_all(contents.as_bytes())?;
                tmp.as_file().sync_all()?;
                tmp.persist(path).map_err(|e| e.error)?;
                Ok(())
            }
        }
    }
}

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
