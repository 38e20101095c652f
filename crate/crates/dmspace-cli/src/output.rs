//! Standard output, file outputs and CSV tables.

use std::env;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

pub const OUT_DIR_VAR: &str = "DMSPACE_OUT_DIR";

/// Pretty JSON on standard output; a closed pipe is not an error.
pub fn print_json<S: Serialize>(value: &S) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(CliError::Io { path: "stdout".into(), source: e }),
        _ => Ok(()),
    }
}

/// Relative paths land in `$DMSPACE_OUT_DIR` when it is set.
pub fn resolve(path: &Path) -> PathBuf {
    match env::var_os(OUT_DIR_VAR) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Explicit `--csv` path, else `<suite>.csv` in the output directory if one is set.
pub fn csv_target(arg: Option<&Path>, suite: &str) -> Option<PathBuf> {
    match arg {
        Some(p) => Some(resolve(p)),
        None => env::var_os(OUT_DIR_VAR).map(|d| Path::new(&d).join(format!("{suite}.csv"))),
    }
}

fn prepare(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })
        }
        _ => Ok(()),
    }
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<PathBuf, CliError> {
    let path = resolve(path);
    prepare(&path)?;
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(&path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    Ok(path)
}

/// Writes a table whose first two columns are the seed and the tolerance.
pub fn write_csv(path: &Path, seed: u64, tol: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    prepare(path)?;
    let mut w = csv::Writer::from_path(path)?;
    let mut head = vec!["seed", "tolerance"];
    head.extend_from_slice(header);
    w.write_record(&head)?;
    for row in rows {
        let mut rec = vec![seed.to_string(), tol.to_string()];
        rec.extend(row.iter().cloned());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    Ok(())
}
