//! Scenario files and atomic output.

use std::fs;
use std::io::Write;
use std::path::Path;

use liyau_core::InitialData;

use crate::error::CliError;

pub fn read_scenario(path: &Path) -> Result<InitialData, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn scenario_json(data: &InitialData) -> String {
    let mut s = serde_json::to_string_pretty(data).expect("initial data serializes");
    s.push('\n');
    s
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io { path: path.into(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// To `path` when given, else stdout.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}
