use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, CliResult, Context};

/// Pretty JSON with a trailing newline.
pub fn to_json<S: Serialize>(value: &S) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(CliError::numerical)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes `bytes` to a temporary file beside `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).input_context(|| format!("cannot create a file in {}", dir.display()))?;
    tmp.write_all(bytes)
        .and_then(|_| tmp.as_file().sync_all())
        .input_context(|| format!("cannot write {}", path.display()))?;
    tmp.persist(path).map_err(|e| e.error).input_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Sends the document to `path`, or to stdout when there is none.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush()).input_context(|| "cannot write to stdout".into())
        }
    }
}
